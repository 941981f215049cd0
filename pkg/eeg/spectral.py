"""
频谱分析模块
Welch功率谱密度估计与频带功率积分
"""

import os
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
import pandas as pd
from scipy import signal
from scipy.integrate import trapezoid

from .errors import TooShort, BadOverlap, BandOutOfRange, DivisionByZero

DEFAULT_WINDOW_LEN = 128
DEFAULT_OVERLAP_FRAC = 0.5
WINDOW_FUNCTION = "hann"

# 网格边界比较容差（Hz）
_GRID_EPS = 1e-9


@dataclass(frozen=True)
class BandDefinition:
    """频带定义（闭区间）"""
    name: str
    lo_hz: float
    hi_hz: float

    def __post_init__(self):
        if not self.lo_hz < self.hi_hz:
            raise ValueError(f"频带 {self.name} 的下限必须小于上限: {self.lo_hz} >= {self.hi_hz}")


# beta与gamma的重叠保持原样
BANDS: Dict[str, BandDefinition] = {
    "delta": BandDefinition("delta", 1.0, 3.0),
    "theta": BandDefinition("theta", 4.0, 7.0),
    "slow": BandDefinition("slow", 4.0, 13.0),
    "alpha": BandDefinition("alpha", 8.0, 12.0),
    "low_beta": BandDefinition("low_beta", 13.0, 17.0),
    "beta": BandDefinition("beta", 13.0, 30.0),
    "gamma": BandDefinition("gamma", 25.0, 43.0),
}

RG_DIRECTIONS = ("gamma_over_slow", "slow_over_gamma")


@dataclass(frozen=True, eq=False)
class PsdEstimate:
    """单侧功率谱密度估计（µV²/Hz）"""
    freqs_hz: np.ndarray
    power: np.ndarray
    window_len: int
    overlap_frac: float
    segment_count: int
    sample_rate_hz: float

    @property
    def resolution_hz(self) -> float:
        return self.sample_rate_hz / self.window_len

    @property
    def nyquist_hz(self) -> float:
        return self.sample_rate_hz / 2.0

    def total_power(self) -> float:
        """矩形求和的总功率，等于加窗分段方差的均值"""
        return float(np.sum(self.power) * self.resolution_hz)


def overlap_samples(window_len: int, overlap_frac: float) -> int:
    """重叠的采样点数"""
    return int(round(window_len * overlap_frac))


def segment_count(n_samples: int, window_len: int, overlap_frac: float) -> int:
    """完整分段数，末尾不足一个窗口的部分丢弃"""
    step = window_len - overlap_samples(window_len, overlap_frac)
    return 1 + (n_samples - window_len) // step


def welch_psd(samples: Sequence[float], sample_rate_hz: float,
              window_len: int = DEFAULT_WINDOW_LEN,
              overlap_frac: float = DEFAULT_OVERLAP_FRAC) -> PsdEstimate:
    """Welch法：Hann窗、分段去均值、密度归一化的单侧谱"""
    x = np.asarray(samples, dtype=float)
    if not 0 <= overlap_frac < 1:
        raise BadOverlap(f"重叠比例必须在[0, 1)内: {overlap_frac}")
    noverlap = overlap_samples(window_len, overlap_frac)
    if noverlap >= window_len:
        raise BadOverlap(f"重叠点数 {noverlap} 不小于窗口长度 {window_len}")
    if len(x) < window_len:
        raise TooShort(f"信号长度 {len(x)} 小于一个窗口 {window_len}")

    freqs, power = signal.welch(
        x, fs=sample_rate_hz, window=WINDOW_FUNCTION, nperseg=window_len,
        noverlap=noverlap, detrend="constant", return_onesided=True,
        scaling="density", average="mean",
    )
    return PsdEstimate(
        freqs_hz=freqs,
        power=np.maximum(power, 0.0),
        window_len=window_len,
        overlap_frac=overlap_frac,
        segment_count=segment_count(len(x), window_len, overlap_frac),
        sample_rate_hz=float(sample_rate_hz),
    )


def band_power(psd: PsdEstimate, band: BandDefinition) -> float:
    """在闭区间内的频点上用梯形法积分"""
    if band.lo_hz < 0 or band.hi_hz > psd.nyquist_hz + _GRID_EPS:
        raise BandOutOfRange(
            f"频带 {band.name} [{band.lo_hz}, {band.hi_hz}] 超出 [0, {psd.nyquist_hz}]"
        )
    mask = (psd.freqs_hz >= band.lo_hz - _GRID_EPS) & (psd.freqs_hz <= band.hi_hz + _GRID_EPS)
    if np.count_nonzero(mask) < 2:
        return 0.0
    return float(trapezoid(psd.power[mask], psd.freqs_hz[mask]))


def band_powers(psd: PsdEstimate) -> Dict[str, float]:
    """计算全部七个频带的功率"""
    return {name: band_power(psd, band) for name, band in BANDS.items()}


def relative_gamma(powers: Dict[str, float], direction: str = "gamma_over_slow") -> float:
    """相对gamma：默认 gamma/slow"""
    if direction not in RG_DIRECTIONS:
        raise ValueError(f"不支持的RG方向: {direction}")
    gamma, slow = powers["gamma"], powers["slow"]
    numerator, denominator = (gamma, slow) if direction == "gamma_over_slow" else (slow, gamma)
    if denominator <= np.finfo(float).eps:
        raise DivisionByZero(f"相对gamma的分母过小: {denominator}")
    return numerator / denominator


def write_psd_csv(psd: PsdEstimate, path: str):
    """导出为 freq_hz,power 格式的CSV"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    pd.DataFrame({"freq_hz": psd.freqs_hz, "power": psd.power}).to_csv(
        path, index=False, lineterminator="\n"
    )
