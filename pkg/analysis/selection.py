"""
特征选择模块
对每个特征做压力组与对照组的双样本t检验，保留 p < α 的特征
"""

import math
from dataclasses import dataclass, field, asdict
from typing import List, Sequence, Optional, Dict

import numpy as np
import pandas as pd
from scipy.special import betainc

from eeg.recording import Label
from eeg.errors import InsufficientGroup, EmptyClass
from .labeling import LabeledDataset


@dataclass(frozen=True)
class TTestResult:
    """单个特征的t检验结果"""
    feature_name: str
    t_stat: float
    p_value: float
    dof: float
    n_stress: int
    n_control: int
    degenerate: bool = False


@dataclass
class SelectionResult:
    """特征选择结果：按p值升序的入选特征 + 完整的检验表"""
    method: str
    alpha_level: float
    pooled: bool
    selected: List[str] = field(default_factory=list)
    table: List[TTestResult] = field(default_factory=list)

    def result_for(self, name: str) -> TTestResult:
        for result in self.table:
            if result.feature_name == name:
                return result
        raise KeyError(name)


def _mean_var(values: Sequence[float]):
    """与顺序无关的均值和样本方差"""
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((value - mean) ** 2 for value in values) / (n - 1)
    return mean, var


def t_distribution_two_tailed_p(t_stat: float, dof: float) -> float:
    """双尾p值：I_{dof/(dof+t²)}(dof/2, 1/2)"""
    if math.isinf(t_stat):
        return 0.0
    x = dof / (dof + t_stat * t_stat)
    return float(min(1.0, max(0.0, betainc(dof / 2.0, 0.5, x))))


def t_test(group_a: Sequence[float], group_b: Sequence[float], pooled: bool = False,
           feature_name: str = "") -> TTestResult:
    """双样本t检验，默认Welch不等方差版本；group_a为压力组"""
    a = [float(value) for value in group_a]
    b = [float(value) for value in group_b]
    if len(a) < 2 or len(b) < 2:
        raise InsufficientGroup(f"每组至少需要2个值 (压力组 {len(a)}, 对照组 {len(b)})",
                                feature=feature_name)
    na, nb = len(a), len(b)
    mean_a, var_a = _mean_var(a)
    mean_b, var_b = _mean_var(b)
    diff = mean_a - mean_b

    if pooled:
        dof = float(na + nb - 2)
        pooled_var = ((na - 1) * var_a + (nb - 1) * var_b) / dof
        se2 = pooled_var * (1.0 / na + 1.0 / nb)
    else:
        va, vb = var_a / na, var_b / nb
        se2 = va + vb
        denominator = va * va / (na - 1) + vb * vb / (nb - 1)
        dof = se2 * se2 / denominator if denominator > 0 else float(na + nb - 2)

    if se2 <= 0:
        # 两组都是常数：均值相同时t无定义，报告p=1
        if diff == 0:
            return TTestResult(feature_name, 0.0, 1.0, dof, na, nb, degenerate=True)
        return TTestResult(feature_name, math.copysign(math.inf, diff), 0.0, dof, na, nb, degenerate=True)

    t_stat = diff / math.sqrt(se2)
    return TTestResult(feature_name, t_stat, t_distribution_two_tailed_p(t_stat, dof), dof, na, nb)


def select_features(dataset: LabeledDataset, alpha_level: float = 0.05, pooled: bool = False,
                    names: Optional[List[str]] = None) -> SelectionResult:
    """逐特征检验；不做多重比较校正"""
    counts = dataset.class_counts()
    if counts[Label.STRESS] == 0 or counts[Label.CONTROL] == 0:
        raise EmptyClass(f"两组都必须有受试者 (压力组 {counts[Label.STRESS]}, 对照组 {counts[Label.CONTROL]})")

    names = names or dataset.feature_names
    table = [
        t_test(dataset.group(Label.STRESS, name), dataset.group(Label.CONTROL, name), pooled, name)
        for name in names
    ]
    order = sorted(range(len(table)), key=lambda index: (table[index].p_value, index))
    selected = [table[index].feature_name for index in order if table[index].p_value < alpha_level]
    return SelectionResult(dataset.method.value, alpha_level, pooled, selected, table)


def ttest_frame(results: List[SelectionResult]) -> pd.DataFrame:
    """ttest_report.csv：feature,t,dof,p,selected（多种方法时加method列）"""
    rows = []
    for result in results:
        selected = set(result.selected)
        for test in result.table:
            rows.append({
                "method": result.method,
                "feature": test.feature_name,
                "t": test.t_stat,
                "dof": test.dof,
                "p": test.p_value,
                "selected": test.feature_name in selected,
            })
    frame = pd.DataFrame(rows, columns=["method", "feature", "t", "dof", "p", "selected"])
    if len(results) == 1:
        frame = frame.drop(columns=["method"])
    return frame


def write_ttest_report(results: List[SelectionResult], path: str):
    ttest_frame(results).to_csv(path, index=False, lineterminator="\n")


def selection_to_dict(result: SelectionResult) -> Dict:
    return {
        "method": result.method,
        "alpha_level": result.alpha_level,
        "pooled": result.pooled,
        "selected": list(result.selected),
        "table": [asdict(test) for test in result.table],
        "multiple_comparison_correction": "none",
    }
