"""
报告统计模块
生成PSS分数直方图和各特征箱线图统计，供外部工具绘图
"""

from typing import List, Dict, Sequence, Tuple, Optional

import numpy as np
import pandas as pd

from eeg.recording import Label
from .labeling import PssScore, LabeledDataset

PSS_MAX_TOTAL = 40
WHISKER_FACTOR = 1.5

GROUP_COLORS = {"control": "green", "stress": "red", "neutral": "yellow"}


def quantile(values: Sequence[float], q: float) -> float:
    """线性插值分位数（type-7）"""
    return float(np.quantile(np.asarray(values, dtype=float), q, method="linear"))


def boxplot_stats(values: Sequence[float]) -> Dict[str, object]:
    """中位数、四分位数、1.5倍IQR须线和离群点"""
    data = np.sort(np.asarray(values, dtype=float))
    if data.size == 0:
        raise ValueError("箱线图至少需要一个值")
    q1, median, q3 = (quantile(data, q) for q in (0.25, 0.5, 0.75))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - WHISKER_FACTOR * iqr, q3 + WHISKER_FACTOR * iqr
    inside = data[(data >= lo_fence) & (data <= hi_fence)]
    outliers = data[(data < lo_fence) | (data > hi_fence)]
    return {
        "n": int(data.size),
        "median": median,
        "q1": q1,
        "q3": q3,
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
        "outliers": [float(value) for value in outliers],
    }


def pss_group(total: float, thresholds: Tuple[float, float]) -> str:
    t_low, t_high = thresholds
    if total < t_low:
        return "control"
    if total > t_high:
        return "stress"
    return "neutral"


def histogram_frame(scores: Sequence[PssScore], thresholds: Tuple[float, float]) -> pd.DataFrame:
    """每个PSS分数一个柱（0..40），附带分组和颜色"""
    counts = np.bincount(np.asarray([score.total for score in scores], dtype=int), minlength=PSS_MAX_TOTAL + 1)
    rows = []
    for total in range(PSS_MAX_TOTAL + 1):
        group = pss_group(total, thresholds)
        rows.append((total, int(counts[total]), group, GROUP_COLORS[group]))
    return pd.DataFrame(rows, columns=["pss_score", "count", "group", "color"])


def boxplot_frame(datasets: List[LabeledDataset], names: Optional[List[str]] = None) -> pd.DataFrame:
    """每个特征 × 标注方法 × 分组的箱线图统计"""
    rows = []
    for dataset in datasets:
        for name in names or dataset.feature_names:
            for label in (Label.STRESS, Label.CONTROL):
                values = dataset.group(label, name)
                if not values:
                    continue
                stats = boxplot_stats(values)
                rows.append({
                    "feature": name,
                    "method": dataset.method.value,
                    "group": label.value,
                    "n": stats["n"],
                    "median": stats["median"],
                    "q1": stats["q1"],
                    "q3": stats["q3"],
                    "whisker_low": stats["whisker_low"],
                    "whisker_high": stats["whisker_high"],
                    "outliers": ";".join(repr(value) for value in stats["outliers"]),
                })
    return pd.DataFrame(rows, columns=["feature", "method", "group", "n", "median", "q1", "q3",
                                       "whisker_low", "whisker_high", "outliers"])
