"""
记录与受试者清单数据类型
定义EEG记录、通道序列、去偏移记录和受试者清单
"""

import math
from enum import Enum
from dataclasses import dataclass, field
from typing import List, Dict, Optional, Tuple, Sequence

import numpy as np

# 标准的五个电极
STANDARD_MONTAGE = ("AF3", "T7", "Pz", "T8", "AF4")
PSS_ITEM_COUNT = 10
PSS_ITEM_MAX = 4


def thresholds_from_stats(mu: float, sigma: float) -> Tuple[float, float]:
    """由均值和标准差得到 (下限, 上限)"""
    return mu - sigma / 2.0, mu + sigma / 2.0


def pss_band(totals: Sequence[float], population_sd: bool = False) -> Tuple[float, float]:
    """PSS总分的中性区间 μ ± σ/2，默认使用样本标准差；至少需要2个分数"""
    mu = math.fsum(totals) / len(totals)
    ddof = 0 if population_sd else 1
    sigma = math.sqrt(math.fsum((total - mu) ** 2 for total in totals) / (len(totals) - ddof))
    return thresholds_from_stats(mu, sigma)


class Label(Enum):
    """受试者分组标签"""
    STRESS = "stress"
    CONTROL = "control"
    UNLABELED = "unlabeled"

    @property
    def as_int(self) -> int:
        """分类器使用的整数编码（1为压力组）"""
        if self == Label.UNLABELED:
            raise ValueError("未标注的受试者没有整数编码")
        return 1 if self == Label.STRESS else 0

    @staticmethod
    def from_int(value: int) -> "Label":
        """从整数编码还原标签"""
        return Label.STRESS if int(value) == 1 else Label.CONTROL


@dataclass(frozen=True, eq=False)
class ChannelSeries:
    """单通道时间序列（微伏）"""
    name: str
    samples: np.ndarray

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True, eq=False)
class Recording:
    """多通道EEG记录"""
    subject_id: str
    sample_rate_hz: float
    channels: Tuple[ChannelSeries, ...]

    @property
    def sample_count(self) -> int:
        """每个通道的采样点数"""
        return len(self.channels[0]) if self.channels else 0

    @property
    def duration_s(self) -> float:
        """记录时长（秒）"""
        return self.sample_count / self.sample_rate_hz

    @property
    def channel_names(self) -> List[str]:
        return [channel.name for channel in self.channels]

    def channel(self, name: str) -> ChannelSeries:
        """按名称获取通道"""
        for channel in self.channels:
            if channel.name == name:
                return channel
        raise KeyError(f"记录 {self.subject_id} 中没有通道 {name}")

    def as_matrix(self) -> np.ndarray:
        """返回 (通道数, 采样点数) 的矩阵"""
        return np.vstack([channel.samples for channel in self.channels])

    def with_channels(self, channels: List[ChannelSeries]) -> "Recording":
        """返回替换通道后的新记录"""
        return Recording(self.subject_id, self.sample_rate_hz, tuple(channels))


@dataclass(frozen=True, eq=False)
class CleanRecording(Recording):
    """已去除基线偏移的记录"""
    offset_removed: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ManifestEntry:
    """清单中的单个受试者"""
    subject_id: str
    recording_path: str
    pss_items: Optional[Tuple[int, ...]] = None
    expert_label: Label = Label.UNLABELED

    @property
    def is_unlabeled(self) -> bool:
        """既没有PSS问卷也没有专家标签"""
        return self.pss_items is None and self.expert_label == Label.UNLABELED

    def to_dict(self) -> Dict:
        data = {"subject_id": self.subject_id, "recording_path": self.recording_path}
        if self.pss_items is not None:
            data["pss_items"] = list(self.pss_items)
        data["expert_label"] = self.expert_label.value
        return data


@dataclass(frozen=True)
class SubjectManifest:
    """受试者清单"""
    entries: Tuple[ManifestEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def subject_ids(self) -> List[str]:
        return [entry.subject_id for entry in self.entries]

    def get(self, subject_id: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.subject_id == subject_id:
                return entry
        raise KeyError(f"清单中没有受试者 {subject_id}")

    def unlabeled(self) -> List[str]:
        """没有任何标注信息的受试者"""
        return [entry.subject_id for entry in self.entries if entry.is_unlabeled]
