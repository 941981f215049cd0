"""
特征提取模块
每个受试者生成45维特征：8个频带特征×5个通道，外加5个alpha/beta不对称指数
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from .recording import CleanRecording, STANDARD_MONTAGE
from .spectral import (
    welch_psd, band_powers, relative_gamma, PsdEstimate,
    DEFAULT_WINDOW_LEN, DEFAULT_OVERLAP_FRAC,
)
from .errors import PipelineError, DegenerateDenominator, MissingChannel

logger = logging.getLogger(__name__)

# 每个通道的特征顺序（与t检验表的列一致）
CHANNEL_FEATURES = ("delta", "theta", "slow", "alpha", "low_beta", "beta", "gamma", "rg")
ASYMMETRY_FEATURES = ("alpha_frontal", "alpha_temporal", "alpha_asym", "beta_frontal", "beta_temporal")
ASYMMETRY_CHANNELS = ("AF3", "AF4", "T7", "T8")


def feature_names(montage: Tuple[str, ...] = STANDARD_MONTAGE) -> List[str]:
    """规范的特征名顺序：按通道分组，最后是不对称指数"""
    names = [f"{band}_{channel}" for channel in montage for band in CHANNEL_FEATURES]
    return names + list(ASYMMETRY_FEATURES)


@dataclass
class ExtractionConfig:
    """特征提取参数"""
    montage: Tuple[str, ...] = STANDARD_MONTAGE
    window_len: int = DEFAULT_WINDOW_LEN
    overlap_frac: float = DEFAULT_OVERLAP_FRAC
    rg_direction: str = "gamma_over_slow"


@dataclass
class FeatureVector:
    """单个受试者的特征向量"""
    subject_id: str
    values: Dict[str, float] = field(default_factory=dict)
    invalid_reason: Optional[str] = None

    @property
    def is_valid(self) -> bool:
        return self.invalid_reason is None

    def __len__(self) -> int:
        return len(self.values)

    def array(self, names: List[str]) -> np.ndarray:
        """按给定特征名顺序取值"""
        return np.array([self.values[name] for name in names], dtype=float)


def _normalized_difference(left: float, right: float, label: str) -> float:
    """(right - left) / (left + right)"""
    if left < 0 or right < 0:
        raise ValueError(f"{label}: 功率不能为负 ({left}, {right})")
    total = left + right
    if total <= np.finfo(float).tiny:
        raise DegenerateDenominator(f"{label}: 两侧功率都接近0")
    return (right - left) / total


def frontal_alpha_asymmetry(a_af3: float, a_af4: float) -> float:
    """额叶alpha不对称 (AF4 - AF3) / (AF3 + AF4)"""
    return _normalized_difference(a_af3, a_af4, "alpha_frontal")


def temporal_alpha_asymmetry(a_t7: float, a_t8: float) -> float:
    """颞叶alpha不对称 (T8 - T7) / (T8 + T7)"""
    return _normalized_difference(a_t7, a_t8, "alpha_temporal")


def alpha_asymmetry(af: float, at: float) -> float:
    """alpha不对称 = 额叶 + 颞叶"""
    return af + at


def beta_asymmetries(b_af3: float, b_af4: float, b_t7: float, b_t8: float) -> Tuple[float, float]:
    """额叶和颞叶beta不对称"""
    return (
        _normalized_difference(b_af3, b_af4, "beta_frontal"),
        _normalized_difference(b_t7, b_t8, "beta_temporal"),
    )


def asymmetry_features(powers: Dict[str, Dict[str, float]]) -> Dict[str, float]:
    """由已积分的各通道频带功率计算五个不对称指数"""
    alpha_f = frontal_alpha_asymmetry(powers["AF3"]["alpha"], powers["AF4"]["alpha"])
    alpha_t = temporal_alpha_asymmetry(powers["T7"]["alpha"], powers["T8"]["alpha"])
    beta_f, beta_t = beta_asymmetries(
        powers["AF3"]["beta"], powers["AF4"]["beta"], powers["T7"]["beta"], powers["T8"]["beta"]
    )
    return {
        "alpha_frontal": alpha_f,
        "alpha_temporal": alpha_t,
        "alpha_asym": alpha_asymmetry(alpha_f, alpha_t),
        "beta_frontal": beta_f,
        "beta_temporal": beta_t,
    }


def channel_psds(clean: CleanRecording, config: ExtractionConfig) -> Dict[str, PsdEstimate]:
    """每个通道的Welch谱"""
    return {
        name: welch_psd(clean.channel(name).samples, clean.sample_rate_hz,
                        config.window_len, config.overlap_frac)
        for name in config.montage
    }


def build_feature_vector(clean: CleanRecording, config: Optional[ExtractionConfig] = None) -> FeatureVector:
    """构建一个受试者的完整特征向量；任何无效特征都会使该受试者被排除"""
    config = config or ExtractionConfig()
    for name in tuple(config.montage) + ASYMMETRY_CHANNELS:
        if name not in clean.channel_names:
            raise MissingChannel(f"特征提取需要通道 {name}", clean.subject_id)

    names = feature_names(tuple(config.montage))
    vector = FeatureVector(clean.subject_id, {name: float("nan") for name in names})
    psds = channel_psds(clean, config)
    powers = {channel: band_powers(psd) for channel, psd in psds.items()}

    problems = []
    for channel in config.montage:
        for band in CHANNEL_FEATURES[:-1]:
            vector.values[f"{band}_{channel}"] = powers[channel][band]
        try:
            vector.values[f"rg_{channel}"] = relative_gamma(powers[channel], config.rg_direction)
        except PipelineError as e:
            problems.append(f"rg_{channel}: {e}")

    try:
        vector.values.update(asymmetry_features(powers))
    except PipelineError as e:
        problems.append(str(e))

    if problems:
        vector.invalid_reason = "; ".join(problems)
        logger.warning("受试者 %s 的特征无效，将被排除: %s", clean.subject_id, vector.invalid_reason)
    return vector


def extract_cohort(cleans: List[CleanRecording], config: Optional[ExtractionConfig] = None,
                   workers: int = 1) -> List[FeatureVector]:
    """并发提取整个队列的特征，结果顺序与输入一致"""
    config = config or ExtractionConfig()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda clean: build_feature_vector(clean, config), cleans))


def feature_frame(vectors: List[FeatureVector]) -> pd.DataFrame:
    """特征矩阵表（第一列为subject_id）"""
    if not vectors:
        return pd.DataFrame(columns=["subject_id"])
    names = list(vectors[0].values)
    rows = [[vector.subject_id] + [vector.values[name] for name in names] for vector in vectors]
    return pd.DataFrame(rows, columns=["subject_id"] + names)


def write_feature_matrix(vectors: List[FeatureVector], path: str):
    """导出特征矩阵：.json 为JSON格式，其他为CSV；无效值留空"""
    if path.endswith(".json"):
        payload = [
            {"subject_id": vector.subject_id,
             "values": {name: (value if np.isfinite(value) else None) for name, value in vector.values.items()},
             "invalid_reason": vector.invalid_reason}
            for vector in vectors
        ]
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
        return
    feature_frame(vectors).to_csv(path, index=False, lineterminator="\n")


def read_feature_matrix(path: str) -> List[FeatureVector]:
    """读取特征矩阵，含空值的行视为无效特征"""
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
        return [
            FeatureVector(
                item["subject_id"],
                {name: (float("nan") if value is None else float(value)) for name, value in item["values"].items()},
                item.get("invalid_reason"),
            )
            for item in payload
        ]
    frame = pd.read_csv(path, dtype={"subject_id": str})
    vectors = []
    names = [column for column in frame.columns if column != "subject_id"]
    for _, row in frame.iterrows():
        values = {name: float(row[name]) for name in names}
        missing = [name for name, value in values.items() if not np.isfinite(value)]
        reason = f"缺失特征: {', '.join(missing)}" if missing else None
        vectors.append(FeatureVector(str(row["subject_id"]), values, reason))
    return vectors
