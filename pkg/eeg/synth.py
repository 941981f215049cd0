"""
合成数据模块
按种子确定地生成合成EEG队列和受试者清单，作为端到端验证的真值
"""

import os
import json
import logging
from dataclasses import dataclass, field, asdict
from typing import List, Dict, Tuple, Any

import numpy as np

from .recording import (
    Recording, ChannelSeries, SubjectManifest, ManifestEntry, Label,
    STANDARD_MONTAGE, PSS_ITEM_COUNT, PSS_ITEM_MAX, pss_band,
)
from .ingest import write_recording, write_manifest
from .errors import InvalidSpec

logger = logging.getLogger(__name__)

GROUPS = ("stress", "control", "neutral")

# 各频带成分的频率（取频带中心附近的整数Hz，避开频带边缘）
BAND_FREQUENCIES = {"delta": 2.0, "theta": 5.0, "alpha": 10.0, "beta": 20.0, "gamma": 35.0}
DEFAULT_BAND_AMPLITUDES = {"delta": 6.0, "theta": 4.0, "alpha": 8.0, "beta": 3.0, "gamma": 1.5}

# 压力组右半球alpha幅值乘以 asymmetry_effect
RIGHT_HEMISPHERE = ("AF4", "T8")

# 各组PSS总分的抽样区间（闭区间）
PSS_RANGES = {"control": (6, 15), "neutral": (17, 23), "stress": (26, 35)}
MAX_PSS_ATTEMPTS = 1000


def _default_amplitudes() -> Dict[str, Dict[str, Dict[str, float]]]:
    return {group: {channel: dict(DEFAULT_BAND_AMPLITUDES) for channel in STANDARD_MONTAGE}
            for group in GROUPS}


@dataclass
class CohortSpec:
    """合成队列参数，种子完全决定生成结果"""
    n_stress: int = 10
    n_control: int = 10
    n_neutral: int = 13
    sample_rate_hz: float = 128.0
    duration_s: float = 180.0
    amplitudes: Dict[str, Dict[str, Dict[str, float]]] = field(default_factory=_default_amplitudes)
    asymmetry_effect: float = 2.0
    noise_sd: float = 2.0
    amplitude_jitter: float = 0.15
    baseline_offset_uv: float = 4000.0
    seed: int = 7

    def __post_init__(self):
        validate_spec(self)

    @property
    def n_subjects(self) -> int:
        return self.n_stress + self.n_control + self.n_neutral

    @property
    def sample_count(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CohortSpec":
        """未给出的组/通道/频带幅值沿用默认值"""
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidSpec(f"未知的合成参数: {sorted(unknown)}")
        amplitudes = _default_amplitudes()
        for group, channels in data.pop("amplitudes", {}).items():
            if group not in amplitudes:
                raise InvalidSpec(f"未知的分组: {group}")
            for channel, bands in channels.items():
                if channel not in amplitudes[group]:
                    raise InvalidSpec(f"未知的通道: {channel}")
                amplitudes[group][channel].update(bands)
        return cls(amplitudes=amplitudes, **data)

    @classmethod
    def from_json(cls, path: str) -> "CohortSpec":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def validate_spec(spec: CohortSpec):
    """校验合成参数"""
    counts = (spec.n_stress, spec.n_control, spec.n_neutral)
    if any(count < 0 for count in counts) or sum(counts) == 0:
        raise InvalidSpec(f"各组人数必须非负且总数大于0: {counts}")
    if spec.sample_rate_hz <= 0 or spec.duration_s <= 0:
        raise InvalidSpec("采样率和时长必须大于0")
    if max(BAND_FREQUENCIES.values()) >= spec.sample_rate_hz / 2:
        raise InvalidSpec(f"采样率 {spec.sample_rate_hz} Hz 不足以表示 gamma 成分")
    if spec.noise_sd < 0 or spec.amplitude_jitter < 0 or spec.asymmetry_effect < 0:
        raise InvalidSpec("噪声、抖动和不对称效应都必须非负")
    for group, channels in spec.amplitudes.items():
        for channel, bands in channels.items():
            for band, amplitude in bands.items():
                if band not in BAND_FREQUENCIES:
                    raise InvalidSpec(f"未知的频带: {band}")
                if amplitude < 0:
                    raise InvalidSpec(f"幅值不能为负: {group}/{channel}/{band} = {amplitude}")


def subject_rng(seed: int, index: int) -> np.random.Generator:
    """每个受试者独立的随机流：由 (种子, 受试者序号) 派生"""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def component_amplitude(spec: CohortSpec, group: str, channel: str, band: str) -> float:
    """不含抖动的成分幅值，压力组右半球alpha乘以效应"""
    amplitude = spec.amplitudes[group][channel][band]
    if group == "stress" and band == "alpha" and channel in RIGHT_HEMISPHERE:
        amplitude *= spec.asymmetry_effect
    return amplitude


def generate_signal(spec: CohortSpec, group: str, rng: np.random.Generator) -> List[ChannelSeries]:
    """各频带正弦（随机相位）之和 + 白噪声 + 基线偏移"""
    t = np.arange(spec.sample_count) / spec.sample_rate_hz
    channels = []
    for channel in STANDARD_MONTAGE:
        samples = np.full(spec.sample_count, spec.baseline_offset_uv)
        for band, frequency in BAND_FREQUENCIES.items():
            jitter = np.exp(rng.normal(0.0, spec.amplitude_jitter)) if spec.amplitude_jitter > 0 else 1.0
            phase = rng.uniform(0.0, 2.0 * np.pi)
            amplitude = component_amplitude(spec, group, channel, band) * jitter
            samples += amplitude * np.sin(2.0 * np.pi * frequency * t + phase)
        if spec.noise_sd > 0:
            samples += rng.normal(0.0, spec.noise_sd, size=spec.sample_count)
        channels.append(ChannelSeries(channel, samples))
    return channels


def pss_items_for_total(total: int, rng: np.random.Generator) -> Tuple[int, ...]:
    """把总分随机分配到10个0..4的题目上"""
    items = [0] * PSS_ITEM_COUNT
    for _ in range(total):
        open_items = [index for index, value in enumerate(items) if value < PSS_ITEM_MAX]
        items[open_items[int(rng.integers(len(open_items)))]] += 1
    return tuple(items)


def draw_pss_totals(groups: List[str], seed: int) -> List[int]:
    """按组抽样PSS总分，拒绝不符合阈值划分的抽样"""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1 << 20]))
    for attempt in range(MAX_PSS_ATTEMPTS):
        totals = [int(rng.integers(PSS_RANGES[g][0], PSS_RANGES[g][1] + 1)) for g in groups]
        if len(totals) < 2:
            return totals
        low, high = pss_band(totals)
        actual = ["stress" if total > high else "control" if total < low else "neutral" for total in totals]
        if actual == groups:
            logger.debug("PSS总分第 %d 次抽样满足划分", attempt + 1)
            return totals
    raise InvalidSpec(f"{MAX_PSS_ATTEMPTS} 次抽样都无法得到预期的PSS划分")


def generate_cohort(spec: CohortSpec) -> Tuple[List[Recording], SubjectManifest]:
    """生成记录和清单；受试者顺序由种子打乱，编号不暴露分组"""
    groups = ["stress"] * spec.n_stress + ["control"] * spec.n_control + ["neutral"] * spec.n_neutral
    order = np.random.default_rng(spec.seed).permutation(len(groups))
    groups = [groups[index] for index in order]
    totals = draw_pss_totals(groups, spec.seed)

    recordings, entries = [], []
    width = max(2, len(str(len(groups))))
    for index, group in enumerate(groups):
        subject_id = f"S{index + 1:0{width}d}"
        rng = subject_rng(spec.seed, index)
        recordings.append(Recording(subject_id, spec.sample_rate_hz, tuple(generate_signal(spec, group, rng))))
        expert = {"stress": Label.STRESS, "control": Label.CONTROL}.get(group, Label.UNLABELED)
        entries.append(ManifestEntry(
            subject_id=subject_id,
            recording_path=os.path.join("recordings", f"{subject_id}.csv"),
            pss_items=pss_items_for_total(totals[index], rng),
            expert_label=expert,
        ))
    return recordings, SubjectManifest(tuple(entries))


def write_cohort(recordings: List[Recording], manifest: SubjectManifest, out_dir: str,
                 spec: CohortSpec = None) -> str:
    """按读取格式写出记录和清单，返回清单路径"""
    os.makedirs(os.path.join(out_dir, "recordings"), exist_ok=True)
    for recording in recordings:
        write_recording(recording, os.path.join(out_dir, "recordings", f"{recording.subject_id}.csv"))
    manifest_path = os.path.join(out_dir, "manifest.json")
    write_manifest(manifest, manifest_path)
    if spec is not None:
        with open(os.path.join(out_dir, "cohort_spec.json"), "w", encoding="utf-8") as f:
            json.dump(spec.to_dict(), f, indent=2)
            f.write("\n")
    return manifest_path
