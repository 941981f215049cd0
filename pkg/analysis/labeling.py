"""
受试者标注模块
按PSS阈值规则或专家评估产生压力组/对照组标签，并组装带标签的数据集
"""

import logging
from enum import Enum
from dataclasses import dataclass, field
from typing import List, Dict, Optional, Tuple, Sequence

import numpy as np
import pandas as pd

from eeg.recording import SubjectManifest, Label, pss_band
from eeg.features import FeatureVector
from eeg.errors import InsufficientCohort

logger = logging.getLogger(__name__)


class LabelMethod(Enum):
    """标注方法"""
    PSS_THRESHOLD = "pss_threshold"
    EXPERT = "expert"

    @staticmethod
    def parse(name: str) -> "LabelMethod":
        """接受命令行写法 pss / expert"""
        aliases = {"pss": LabelMethod.PSS_THRESHOLD, "pss_threshold": LabelMethod.PSS_THRESHOLD,
                   "expert": LabelMethod.EXPERT}
        if name not in aliases:
            raise ValueError(f"不支持的标注方法: {name}")
        return aliases[name]


class ExclusionReason(Enum):
    """受试者被排除的原因"""
    NEUTRAL_BAND = "neutral_band"
    UNLABELED = "unlabeled"
    INVALID_FEATURES = "invalid_features"


@dataclass(frozen=True)
class PssScore:
    """PSS-10总分"""
    subject_id: str
    total: int


@dataclass
class LabelPartition:
    """一次标注的结果：纳入的标签和排除的原因"""
    method: LabelMethod
    labels: Dict[str, Label] = field(default_factory=dict)
    excluded: Dict[str, ExclusionReason] = field(default_factory=dict)
    thresholds: Optional[Tuple[float, float]] = None
    sd_kind: Optional[str] = None

    def counts(self) -> Dict[str, int]:
        """各组人数"""
        result = {"stress": 0, "control": 0}
        for label in self.labels.values():
            result[label.value] += 1
        for reason in self.excluded.values():
            result[reason.value] = result.get(reason.value, 0) + 1
        return result


@dataclass
class LabeledRow:
    subject_id: str
    features: FeatureVector
    label: Label


@dataclass
class LabeledDataset:
    """特征矩阵 + 二分类标签 + 标注方法来源"""
    method: LabelMethod
    rows: List[LabeledRow] = field(default_factory=list)
    excluded: List[Tuple[str, ExclusionReason]] = field(default_factory=list)
    thresholds: Optional[Tuple[float, float]] = None
    sd_kind: Optional[str] = None

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def subject_ids(self) -> List[str]:
        return [row.subject_id for row in self.rows]

    @property
    def feature_names(self) -> List[str]:
        return list(self.rows[0].features.values) if self.rows else []

    def matrix(self, names: Optional[List[str]] = None) -> np.ndarray:
        """(受试者数, 特征数) 的特征矩阵"""
        names = names or self.feature_names
        if not self.rows:
            return np.empty((0, len(names)))
        return np.vstack([row.features.array(names) for row in self.rows])

    def targets(self) -> np.ndarray:
        """整数标签（1为压力组）"""
        return np.array([row.label.as_int for row in self.rows], dtype=int)

    def group(self, label: Label, name: str) -> List[float]:
        """某一组在某个特征上的取值"""
        return [row.features.values[name] for row in self.rows if row.label == label]

    def class_counts(self) -> Dict[Label, int]:
        counts = {Label.STRESS: 0, Label.CONTROL: 0}
        for row in self.rows:
            counts[row.label] += 1
        return counts


def score_pss(items: Sequence[int], subject_id: str = "") -> PssScore:
    """PSS总分为10项之和（取值范围已在读取时校验）"""
    return PssScore(subject_id, int(sum(items)))


def pss_thresholds(scores: Sequence[PssScore], population_sd: bool = False) -> Tuple[float, float]:
    """阈值 T = μ ± σ/2，默认使用样本标准差"""
    if len(scores) < 2:
        raise InsufficientCohort(f"计算阈值至少需要2个PSS分数，实际 {len(scores)} 个")
    return pss_band([float(score.total) for score in scores], population_sd)


def label_by_pss(scores: Sequence[PssScore], thresholds: Tuple[float, float]) -> LabelPartition:
    """低于下限为对照组，高于上限为压力组，其余为中性（严格不等号）"""
    t_low, t_high = thresholds
    partition = LabelPartition(LabelMethod.PSS_THRESHOLD, thresholds=thresholds)
    for score in scores:
        if score.total < t_low:
            partition.labels[score.subject_id] = Label.CONTROL
        elif score.total > t_high:
            partition.labels[score.subject_id] = Label.STRESS
        else:
            partition.excluded[score.subject_id] = ExclusionReason.NEUTRAL_BAND
    return partition


def manifest_scores(manifest: SubjectManifest) -> List[PssScore]:
    """清单中所有带PSS问卷的受试者分数"""
    return [score_pss(entry.pss_items, entry.subject_id)
            for entry in manifest if entry.pss_items is not None]


def label_manifest_by_pss(manifest: SubjectManifest, population_sd: bool = False) -> LabelPartition:
    """对整个清单应用PSS阈值规则；没有问卷的受试者记为未标注"""
    scores = manifest_scores(manifest)
    thresholds = pss_thresholds(scores, population_sd)
    partition = label_by_pss(scores, thresholds)
    partition.sd_kind = "population" if population_sd else "sample"
    for entry in manifest:
        if entry.pss_items is None:
            partition.excluded[entry.subject_id] = ExclusionReason.UNLABELED
    logger.info("PSS阈值: 下限 %.2f, 上限 %.2f (%s标准差)", thresholds[0], thresholds[1],
                "总体" if population_sd else "样本")
    return partition


def label_by_expert(manifest: SubjectManifest) -> LabelPartition:
    """采用清单中的专家标签，其余受试者记为未标注"""
    partition = LabelPartition(LabelMethod.EXPERT)
    for entry in manifest:
        if entry.expert_label in (Label.STRESS, Label.CONTROL):
            partition.labels[entry.subject_id] = entry.expert_label
        else:
            partition.excluded[entry.subject_id] = ExclusionReason.UNLABELED
    if not partition.labels:
        logger.warning("清单中没有任何专家标签，数据集为空")
    return partition


def label_cohort(manifest: SubjectManifest, method: LabelMethod, population_sd: bool = False) -> LabelPartition:
    """按指定方法标注整个清单"""
    if method == LabelMethod.EXPERT:
        return label_by_expert(manifest)
    return label_manifest_by_pss(manifest, population_sd)


def build_dataset(partition: LabelPartition, vectors: List[FeatureVector],
                  subject_order: Optional[List[str]] = None) -> LabeledDataset:
    """把标注结果与特征向量合并；特征无效的受试者排除"""
    by_id = {vector.subject_id: vector for vector in vectors}
    order = list(subject_order or by_id)
    order += [sid for sid in list(partition.labels) + list(partition.excluded) if sid not in order]

    dataset = LabeledDataset(partition.method, thresholds=partition.thresholds, sd_kind=partition.sd_kind)
    for subject_id in order:
        if subject_id in partition.excluded:
            dataset.excluded.append((subject_id, partition.excluded[subject_id]))
        elif subject_id in partition.labels:
            vector = by_id.get(subject_id)
            if vector is None or not vector.is_valid:
                dataset.excluded.append((subject_id, ExclusionReason.INVALID_FEATURES))
            else:
                dataset.rows.append(LabeledRow(subject_id, vector, partition.labels[subject_id]))
        else:
            dataset.excluded.append((subject_id, ExclusionReason.UNLABELED))
    return dataset


def labels_frame(dataset: LabeledDataset) -> pd.DataFrame:
    """labels.csv 的内容：subject_id,label,reason（按受试者编号排序）"""
    rows = [(row.subject_id, row.label.value, "") for row in dataset.rows]
    rows += [(subject_id, "excluded", reason.value) for subject_id, reason in dataset.excluded]
    rows.sort(key=lambda item: item[0])
    return pd.DataFrame(rows, columns=["subject_id", "label", "reason"])


def write_labels(dataset: LabeledDataset, path: str):
    labels_frame(dataset).to_csv(path, index=False, lineterminator="\n")
