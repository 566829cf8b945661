from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .discretize import DEFAULT_BINS
from .nbc import DEFAULT_ALPHA
from .preprocess import SelectionConfig
from .significance import I0_MODES, MI_MODES


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline run depends on; the seed lives in ``selection``."""
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    alpha: float = DEFAULT_ALPHA
    bins: int = DEFAULT_BINS
    folds: int = 5
    mi_mode: str = "standard"
    i0_mode: str = "binary"

    def __post_init__(self):
        if self.mi_mode not in MI_MODES:
            raise ValueError(f"mi_mode must be one of {MI_MODES}")
        if self.i0_mode not in I0_MODES:
            raise ValueError(f"i0_mode must be one of {I0_MODES}")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.bins < 2 or self.folds < 2:
            raise ValueError("bins and folds must be >= 2")

    @property
    def seed(self) -> int:
        return self.selection.seed

    def snapshot(self) -> dict:
        return asdict(self)
