"""
评估模块
10折交叉验证与五项性能指标（准确率、Kappa、F值、MAE、RMAE）
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import List, Dict, Optional, Sequence, Callable, Any

import numpy as np
import pandas as pd

from eeg.recording import Label
from eeg.errors import (
    PipelineError, LengthMismatch, TooFewSubjects, TooFewPerClass, StageError,
)
from .labeling import LabeledDataset
from .classifiers import Classifier, ClassifierSpec, ClassifierFactory

logger = logging.getLogger(__name__)

MAE_CONVENTION = "对两个类别位置的概率误差取平均；RMAE为均方概率误差的平方根"


@dataclass
class FoldPlan:
    """折划分：受试者编号 -> 折序号"""
    fold_count: int
    assignments: Dict[str, int]
    seed: int
    stratified: bool

    def test_ids(self, fold: int) -> List[str]:
        return [sid for sid, index in self.assignments.items() if index == fold]

    def train_ids(self, fold: int) -> List[str]:
        return [sid for sid, index in self.assignments.items() if index != fold]

    def fold_sizes(self) -> List[int]:
        return [len(self.test_ids(fold)) for fold in range(self.fold_count)]


@dataclass
class Metrics:
    """合并预测上的性能指标"""
    accuracy_pct: float
    kappa: float
    f_measure: float
    mae: float
    rmae: float
    confusion: List[List[int]]             # 行为真实标签，列为预测标签，顺序 [对照组, 压力组]
    per_class_recall: Dict[str, float]
    kappa_degenerate: bool = False


@dataclass
class FoldResult:
    fold: int
    subject_ids: List[str]
    true_labels: List[int]
    pred_labels: List[int]
    p_stress: List[float]


@dataclass
class ClassifierEvaluation:
    """一个分类器在一个特征组合上的交叉验证结果"""
    classifier: str
    feature_set: List[str]
    metrics: Metrics
    folds: List[FoldResult] = field(default_factory=list)


@dataclass
class EvaluationReport:
    """全部分类器 × 特征组合的评估报告"""
    method: str
    fold_count: int
    seed: int
    stratified: bool
    assignments: Dict[str, int]
    results: List[ClassifierEvaluation] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def get(self, classifier: str, feature_set: Sequence[str]) -> ClassifierEvaluation:
        for result in self.results:
            if result.classifier == classifier and result.feature_set == list(feature_set):
                return result
        raise KeyError(f"{classifier} / {feature_set}")


def make_folds(dataset: LabeledDataset, fold_count: int = 10, seed: int = 42,
               stratified: bool = True) -> FoldPlan:
    """按种子确定的折划分；分层时每折各类人数最多相差1"""
    n = len(dataset)
    if n < fold_count:
        raise TooFewSubjects(f"受试者数 {n} 少于折数 {fold_count}")
    labels = {row.subject_id: row.label for row in dataset.rows}
    rng = np.random.default_rng(seed)

    if stratified:
        groups = [sorted(sid for sid, label in labels.items() if label == wanted)
                  for wanted in (Label.CONTROL, Label.STRESS)]
        for group, name in zip(groups, ("对照组", "压力组")):
            if len(group) < fold_count:
                raise TooFewPerClass(
                    f"{name}只有 {len(group)} 人，少于折数 {fold_count}；请减少折数或使用 --no-stratify"
                )
    else:
        groups = [sorted(labels)]

    assignments = {}
    position = 0
    for group in groups:
        for index in rng.permutation(len(group)):
            assignments[group[index]] = position % fold_count
            position += 1
    ordered = {sid: assignments[sid] for sid in dataset.subject_ids}
    return FoldPlan(fold_count, ordered, seed, stratified)


def metrics(pred_labels: Sequence[int], pred_probs: Sequence[float], true_labels: Sequence[int]) -> Metrics:
    """五项指标；kappa分母为0时记为0并标记"""
    pred = np.asarray(pred_labels, dtype=int)
    prob = np.asarray(pred_probs, dtype=float)
    true = np.asarray(true_labels, dtype=int)
    if not (len(pred) == len(prob) == len(true)):
        raise LengthMismatch(f"长度不一致: 预测 {len(pred)}, 概率 {len(prob)}, 真实 {len(true)}")
    if len(true) == 0:
        raise LengthMismatch("至少需要一个预测")
    n = len(true)

    confusion = np.array([[np.sum((true == t) & (pred == p)) for p in (0, 1)] for t in (0, 1)])
    observed = np.trace(confusion) / n
    expected = float(np.sum(confusion.sum(axis=1) * confusion.sum(axis=0))) / (n * n)
    degenerate = np.isclose(1.0 - expected, 0.0)
    kappa = 0.0 if degenerate else (observed - expected) / (1.0 - expected)

    f_scores, recalls = [], {}
    for c, name in ((0, "control"), (1, "stress")):
        tp = confusion[c, c]
        actual, predicted = confusion[c].sum(), confusion[:, c].sum()
        precision = tp / predicted if predicted else 0.0
        recall = tp / actual if actual else 0.0
        recalls[name] = float(recall)
        f_scores.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    weights = confusion.sum(axis=1) / n
    f_measure = float(np.dot(weights, f_scores))

    # 两个类别位置 |1[y=stress] - p| 与 |1[y=control] - (1-p)| 相等
    error = true - prob
    mae = float(np.mean(np.abs(error)))
    rmae = float(np.sqrt(np.mean(error ** 2)))

    return Metrics(
        accuracy_pct=100.0 * float(observed),
        kappa=float(kappa),
        f_measure=f_measure,
        mae=mae,
        rmae=rmae,
        confusion=confusion.tolist(),
        per_class_recall=recalls,
        kappa_degenerate=bool(degenerate),
    )


ModelFactory = Callable[[ClassifierSpec], Classifier]


def cross_validate(spec: ClassifierSpec, dataset: LabeledDataset, plan: FoldPlan,
                   feature_set: Optional[List[str]] = None, workers: int = 1,
                   model_factory: Optional[ModelFactory] = None) -> ClassifierEvaluation:
    """每折用其余数据训练并预测本折，在合并后的预测上计算指标"""
    feature_set = list(feature_set or dataset.feature_names)
    model_factory = model_factory or ClassifierFactory.create
    X = dataset.matrix(feature_set)
    y = dataset.targets()
    index = {sid: i for i, sid in enumerate(dataset.subject_ids)}

    def run_fold(fold: int) -> FoldResult:
        train_rows = [index[sid] for sid in plan.train_ids(fold)]
        test_ids = plan.test_ids(fold)
        test_rows = [index[sid] for sid in test_ids]
        try:
            model = model_factory(spec).fit(X[train_rows], y[train_rows], feature_set)
            probs = model.predict_proba(X[test_rows])
            labels = model.predict_labels(X[test_rows])
        except PipelineError as e:
            raise StageError(f"cross_validate[{spec.kind.value}, fold {fold}]", e) from e
        return FoldResult(fold, test_ids, y[test_rows].tolist(), labels.tolist(), probs.tolist())

    with ThreadPoolExecutor(max_workers=workers) as executor:
        folds = list(executor.map(run_fold, range(plan.fold_count)))

    pooled_true = [label for fold in folds for label in fold.true_labels]
    pooled_pred = [label for fold in folds for label in fold.pred_labels]
    pooled_prob = [p for fold in folds for p in fold.p_stress]
    return ClassifierEvaluation(spec.kind.value, feature_set,
                                metrics(pooled_pred, pooled_prob, pooled_true), folds)


def feature_combinations(features: Sequence[str], max_size: int = 3) -> List[List[str]]:
    """所有非空特征组合，先按大小再按原顺序"""
    combos = []
    for size in range(1, min(max_size, len(features)) + 1):
        combos.extend(list(combo) for combo in itertools.combinations(features, size))
    return combos


def evaluate_grid(dataset: LabeledDataset, specs: List[ClassifierSpec], feature_sets: List[List[str]],
                  plan: FoldPlan, workers: int = 1) -> EvaluationReport:
    """每个分类器 × 每个特征组合做交叉验证"""
    report = EvaluationReport(
        method=dataset.method.value,
        fold_count=plan.fold_count,
        seed=plan.seed,
        stratified=plan.stratified,
        assignments=dict(plan.assignments),
        metadata={
            "mae_convention": MAE_CONVENTION,
            "metric_pooling": "pooled",
            "tie_rule": "p_stress == 0.5 -> control",
            "sd_kind": dataset.sd_kind,
            "thresholds": list(dataset.thresholds) if dataset.thresholds else None,
            "n_stress": dataset.class_counts()[Label.STRESS],
            "n_control": dataset.class_counts()[Label.CONTROL],
        },
    )
    for feature_set in feature_sets:
        for spec in specs:
            result = cross_validate(spec, dataset, plan, feature_set, workers)
            logger.debug("%s %s: 准确率 %.1f%%", spec.kind.value, feature_set, result.metrics.accuracy_pct)
            report.results.append(result)
    return report


def feature_set_key(feature_set: Sequence[str]) -> str:
    return "+".join(feature_set)


def table2_frame(report: EvaluationReport) -> pd.DataFrame:
    """行为特征组合、列为分类器的准确率表"""
    classifiers = list(dict.fromkeys(result.classifier for result in report.results))
    feature_sets = list(dict.fromkeys(feature_set_key(result.feature_set) for result in report.results))
    accuracy = {(feature_set_key(r.feature_set), r.classifier): r.metrics.accuracy_pct for r in report.results}
    rows = [[key] + [accuracy.get((key, name), np.nan) for name in classifiers] for key in feature_sets]
    return pd.DataFrame(rows, columns=["feature_set"] + classifiers)


def table3_frame(report: EvaluationReport) -> pd.DataFrame:
    """每个分类器准确率最高的特征组合及其全部指标"""
    best: Dict[str, ClassifierEvaluation] = {}
    for result in report.results:
        current = best.get(result.classifier)
        if current is None or result.metrics.accuracy_pct > current.metrics.accuracy_pct:
            best[result.classifier] = result
    rows = [
        {
            "classifier": name,
            "feature_set": feature_set_key(result.feature_set),
            "accuracy_pct": result.metrics.accuracy_pct,
            "kappa": result.metrics.kappa,
            "f_measure": result.metrics.f_measure,
            "mae": result.metrics.mae,
            "rmae": result.metrics.rmae,
            "recall_stress": result.metrics.per_class_recall["stress"],
            "recall_control": result.metrics.per_class_recall["control"],
        }
        for name, result in best.items()
    ]
    return pd.DataFrame(rows, columns=["classifier", "feature_set", "accuracy_pct", "kappa", "f_measure",
                                       "mae", "rmae", "recall_stress", "recall_control"])
