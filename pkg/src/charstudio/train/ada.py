"""Adaptive augmentation probability control."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class AdaState:
    p: float = 0.0
    rt_smooth: float = 0.0
    updates: int = 0
    history: list[float] = field(default_factory=list)
    window: int = 4

    def __post_init__(self):
        self.p = min(max(self.p, 0.0), 1.0)

    def observe(self, rt: float) -> float:
        """Push a raw rt sample; returns the mean over the trailing window."""
        self.history.append(rt)
        if len(self.history) > self.window:
            self.history = self.history[-self.window :]
        self.rt_smooth = sum(self.history) / len(self.history)
        return self.rt_smooth

    def snapshot(self) -> dict:
        return {
            "p": self.p,
            "rt_smooth": self.rt_smooth,
            "updates": self.updates,
            "history": list(self.history),
        }

    @staticmethod
    def from_snapshot(doc: dict) -> "AdaState":
        return AdaState(
            p=doc["p"],
            rt_smooth=doc["rt_smooth"],
            updates=doc["updates"],
            history=list(doc.get("history", [])),
        )


def ada_update(ada: AdaState, rt: float, target: float = 0.6, step: float = 0.01) -> AdaState:
    """p moves by a fixed step toward keeping rt at the target; clamped to [0,1]."""
    if not -1.0 <= rt <= 1.0:
        raise ValueError(f"rt must lie in [-1,1], got {rt}")
    sign = 0.0 if rt == target else (1.0 if rt > target else -1.0)
    ada.p = min(max(ada.p + step * sign, 0.0), 1.0)
    ada.updates += 1
    return ada
