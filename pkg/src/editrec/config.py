"""Engine configuration: scoring weights, thresholds, window and budget knobs."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any


@dataclass
class ScoringConfig:
    """Knobs of the file-propagation score and prior-edit relevance.

    alpha1/alpha2 weight the dependency and semantic terms of the file
    score; epsilon is its constant offset.  th_sub gates which files are
    reported, th_pri gates which prior edits are selected.  k_window is the
    line-distance horizon beyond which location similarity is zero.
    """

    alpha1: float = 0.6
    alpha2: float = 0.4
    epsilon: float = 0.0
    # Lexical backends produce conservative absolute scores; both gates sit
    # far below the midpoint so genuinely related items clear them.
    th_sub: float = 0.05
    th_pri: float = 0.25
    k_window: int = 10
    max_segment_tokens: int = 256

    def __post_init__(self):
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise ValueError("alpha1 and alpha2 must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.th_sub < 0:
            raise ValueError("th_sub must be non-negative")
        if not 0 < self.th_pri < 1:
            raise ValueError("th_pri must lie strictly between 0 and 1")
        if self.k_window < 1:
            raise ValueError("k_window must be at least 1")
        if self.max_segment_tokens < 16:
            raise ValueError("max_segment_tokens must be at least 16")


@dataclass
class LogisticCombiner:
    """Logistic blend of relevance features into a probability-like score."""

    w_dep: float = 1.0
    w_sem: float = 1.0
    w_loc: float = 1.0
    w_prompt: float = 0.0
    bias: float = -1.5

    def __post_init__(self):
        if min(self.w_dep, self.w_sem, self.w_loc, self.w_prompt) < 0:
            raise ValueError("combiner weights must be non-negative")

    def combine(self, dep: float, sem: float, loc: float,
                prompt_sim: float = 0.0) -> float:
        z = (self.w_dep * dep + self.w_sem * sem + self.w_loc * loc
             + self.w_prompt * prompt_sim + self.bias)
        return 1.0 / (1.0 + math.exp(-z))


@dataclass
class EngineConfig:
    """Everything the end-to-end engine needs, bundled for sessions and eval."""

    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    combiner: LogisticCombiner = field(default_factory=LogisticCombiner)
    # Line locator.
    window_size: int = 40
    window_stride: int = 20
    theta_replace: float = 0.5
    theta_insert: float = 0.6
    # Candidate generator.
    context_lines: int = 3
    # Serialization budget shared by locator and generator inputs.
    token_budget: int = 512
    # Worker pool for fan-out over windows.
    max_workers: int = 4

    def __post_init__(self):
        if self.window_size < 1 or self.window_stride < 1:
            raise ValueError("window_size and window_stride must be positive")
        if self.window_stride > self.window_size:
            raise ValueError("window_stride must not exceed window_size")
        if not 0 < self.theta_replace <= 1 or not 0 < self.theta_insert <= 1:
            raise ValueError("label thresholds must lie in (0, 1]")
        if self.context_lines < 0:
            raise ValueError("context_lines must be non-negative")
        if self.token_budget < 16:
            raise ValueError("token_budget must be at least 16")
        if self.max_workers < 1:
            raise ValueError("max_workers must be positive")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EngineConfig":
        data = dict(data)
        scoring = ScoringConfig(**data.pop("scoring", {}))
        combiner = LogisticCombiner(**data.pop("combiner", {}))
        return cls(scoring=scoring, combiner=combiner, **data)

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def config_hash(self) -> str:
        """Stable short digest identifying this configuration."""
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]
