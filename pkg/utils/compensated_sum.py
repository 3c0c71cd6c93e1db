import numpy as np


class CompensatedSum:
    """Kahan-compensated running sum of vectors"""

    def __init__(self, dim: int):
        self.total = np.zeros(dim)
        self._compensation = np.zeros(dim)
        self.count = 0

    def add(self, value: np.ndarray) -> None:
        corrected = value - self._compensation
        updated = self.total + corrected
        self._compensation = (updated - self.total) - corrected
        self.total = updated
        self.count += 1

    def mean(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros_like(self.total)
        return self.total / self.count
