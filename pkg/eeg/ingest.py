"""
数据读取模块
解析并校验EEG记录CSV和受试者清单JSON，定义所有磁盘格式
"""

import os
import json
import numbers
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Dict, Any

import numpy as np
import pandas as pd

from .recording import (
    Recording, ChannelSeries, SubjectManifest, ManifestEntry, Label,
    STANDARD_MONTAGE, PSS_ITEM_COUNT, PSS_ITEM_MAX,
)
from .errors import (
    ValidationError, MissingChannel, NonFiniteSample, RaggedChannels, BadSampleRate,
    TooShortRecording, DuplicateSubject, PssOutOfRange, PssWrongArity, UnknownLabel,
)

logger = logging.getLogger(__name__)

TIME_COLUMN = "time_s"


@dataclass
class IngestConfig:
    """记录读取参数"""
    montage: List[str] = field(default_factory=lambda: list(STANDARD_MONTAGE))
    sample_rate_hz: Optional[float] = None
    rate_tolerance: float = 0.01
    min_samples: int = 256

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IngestConfig":
        return cls(**{key: value for key, value in data.items() if key in cls.__dataclass_fields__})


def sidecar_path(path: str) -> str:
    """记录文件对应的采样率JSON路径"""
    root, _ = os.path.splitext(path)
    return root + ".json"


def _read_sidecar_rate(path: str) -> Optional[float]:
    """读取采样率JSON（不存在时返回None）"""
    sidecar = sidecar_path(path)
    if not os.path.exists(sidecar):
        return None
    with open(sidecar, "r", encoding="utf-8") as f:
        data = json.load(f)
    if "sample_rate_hz" not in data:
        raise BadSampleRate("采样率文件缺少 sample_rate_hz", path=sidecar)
    return float(data["sample_rate_hz"])


def _read_header(path: str) -> List[str]:
    with open(path, "r", encoding="utf-8") as f:
        return [name.strip() for name in f.readline().strip().split(",")]


def _infer_sample_rate(times: np.ndarray, path: str) -> float:
    """从时间列推断采样率"""
    if len(times) < 2:
        raise BadSampleRate("时间列太短，无法推断采样率", path=path)
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise BadSampleRate("时间列不是严格递增的", path=path)
    return 1.0 / float(np.median(steps))


def _resolve_sample_rate(declared: Optional[float], times: Optional[np.ndarray],
                         tolerance: float, path: str) -> float:
    """确定采样率：声明值与时间列推断值必须在容差内一致"""
    inferred = _infer_sample_rate(times, path) if times is not None else None
    rate = declared if declared is not None else inferred
    if rate is None:
        raise BadSampleRate("既没有声明采样率，也没有时间列", path=path)
    if not np.isfinite(rate) or rate <= 0:
        raise BadSampleRate(f"采样率无效: {rate}", path=path)
    if declared is not None and inferred is not None:
        if abs(inferred - declared) > tolerance * declared:
            raise BadSampleRate(
                f"时间列推断的采样率 {inferred:.4f} Hz 与声明值 {declared} Hz 不一致", path=path
            )
    return float(rate)


def load_recording(path: str, config: Optional[IngestConfig] = None,
                   subject_id: Optional[str] = None) -> Recording:
    """读取并校验一个记录CSV，通道顺序按电极排列归一化"""
    config = config or IngestConfig()
    subject_id = subject_id or os.path.splitext(os.path.basename(path))[0]

    if not os.path.isfile(path):
        raise ValidationError("记录文件不存在", subject_id, path=path)
    header = _read_header(path)
    duplicates = sorted({name for name in header if header.count(name) > 1})
    if duplicates:
        raise ValidationError(f"表头中通道重复: {duplicates}", subject_id, path=path)

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as e:
        raise RaggedChannels(f"CSV行长度不一致: {e}", subject_id, path=path) from e
    frame.columns = [name.strip() for name in frame.columns]

    for name in config.montage:
        if name not in frame.columns:
            raise MissingChannel(f"缺少电极通道 {name}", subject_id, path=path)
    extra = [name for name in frame.columns if name not in config.montage and name != TIME_COLUMN]
    if extra:
        logger.warning("记录 %s 中有不在电极排列内的列，已忽略: %s", subject_id, extra)

    present = {name: int((frame[name] != "").sum()) for name in config.montage}
    if len(set(present.values())) > 1:
        raise RaggedChannels(f"各通道采样点数不一致: {present}", subject_id, path=path)

    channels = []
    for name in config.montage:
        try:
            samples = pd.to_numeric(frame[name]).to_numpy(dtype=float)
        except (ValueError, TypeError) as e:
            raise NonFiniteSample(f"通道 {name} 含有无法解析的数值: {e}", subject_id, path=path) from e
        bad = np.flatnonzero(~np.isfinite(samples))
        if bad.size:
            raise NonFiniteSample(
                f"通道 {name} 第 {int(bad[0])} 个采样点不是有限值", subject_id, path=path
            )
        channels.append(ChannelSeries(name, samples))

    times = None
    if TIME_COLUMN in frame.columns:
        times = pd.to_numeric(frame[TIME_COLUMN]).to_numpy(dtype=float)
    declared = config.sample_rate_hz
    sidecar_rate = _read_sidecar_rate(path)
    if sidecar_rate is not None:
        declared = sidecar_rate
    rate = _resolve_sample_rate(declared, times, config.rate_tolerance, path)

    recording = Recording(subject_id, rate, tuple(channels))
    if recording.sample_count < config.min_samples:
        raise TooShortRecording(
            f"记录只有 {recording.sample_count} 个采样点，少于 {config.min_samples}", subject_id, path=path
        )
    logger.debug("读取记录 %s: %d 点, %.1f Hz", subject_id, recording.sample_count, rate)
    return recording


def write_recording(recording: Recording, path: str):
    """按记录CSV格式写出，同时写出采样率JSON"""
    n = recording.sample_count
    data = {TIME_COLUMN: np.arange(n) / recording.sample_rate_hz}
    for channel in recording.channels:
        data[channel.name] = channel.samples
    pd.DataFrame(data).to_csv(path, index=False, lineterminator="\n")
    with open(sidecar_path(path), "w", encoding="utf-8") as f:
        json.dump({"sample_rate_hz": recording.sample_rate_hz}, f)
        f.write("\n")


def _parse_label(value: Any, subject_id: str) -> Label:
    if value is None:
        return Label.UNLABELED
    try:
        return Label(str(value).strip().lower())
    except ValueError:
        raise UnknownLabel(f"未知的专家标签: {value}", subject_id)


def _is_whole_number(item: Any) -> bool:
    if isinstance(item, bool):
        return False
    if isinstance(item, numbers.Integral):
        return True
    return isinstance(item, numbers.Real) and float(item).is_integer()


def _parse_pss_items(value: Any, subject_id: str):
    if value is None:
        return None
    if not isinstance(value, (list, tuple)):
        raise PssWrongArity(f"PSS问卷必须是数组: {value!r}", subject_id)
    items = list(value)
    if len(items) != PSS_ITEM_COUNT:
        raise PssWrongArity(f"PSS问卷应有 {PSS_ITEM_COUNT} 项，实际 {len(items)} 项", subject_id)
    parsed = []
    for index, item in enumerate(items):
        if not _is_whole_number(item):
            raise PssOutOfRange(f"PSS第 {index + 1} 项不是整数: {item}", subject_id)
        if not 0 <= int(item) <= PSS_ITEM_MAX:
            raise PssOutOfRange(f"PSS第 {index + 1} 项超出0..{PSS_ITEM_MAX}: {item}", subject_id)
        parsed.append(int(item))
    return tuple(parsed)


def parse_manifest(records: List[Dict[str, Any]]) -> SubjectManifest:
    """从JSON对象列表构建并校验清单"""
    entries = []
    seen = set()
    for position, record in enumerate(records):
        if not isinstance(record, dict):
            raise ValidationError(f"清单第 {position + 1} 条不是JSON对象")
        if record.get("subject_id") in (None, ""):
            raise ValidationError(f"清单第 {position + 1} 条缺少 subject_id")
        subject_id = str(record["subject_id"])
        if subject_id in seen:
            raise DuplicateSubject("受试者编号重复", subject_id)
        seen.add(subject_id)
        entry = ManifestEntry(
            subject_id=subject_id,
            recording_path=str(record.get("recording_path", "")),
            pss_items=_parse_pss_items(record.get("pss_items"), subject_id),
            expert_label=_parse_label(record.get("expert_label"), subject_id),
        )
        if entry.is_unlabeled:
            logger.info("受试者 %s 没有PSS问卷和专家标签，标记为未标注", subject_id)
        entries.append(entry)
    return SubjectManifest(tuple(entries))


def load_manifest(path: str) -> SubjectManifest:
    """读取受试者清单JSON"""
    if not os.path.isfile(path):
        raise ValidationError("清单文件不存在", path=path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            records = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"清单不是合法的JSON: {e}", path=path) from e
    if not isinstance(records, list):
        raise ValidationError("清单必须是JSON数组", path=path)
    return parse_manifest(records)


def write_manifest(manifest: SubjectManifest, path: str):
    """写出受试者清单JSON"""
    with open(path, "w", encoding="utf-8") as f:
        json.dump([entry.to_dict() for entry in manifest], f, indent=2)
        f.write("\n")


def resolve_recording_path(manifest_path: str, entry: ManifestEntry) -> str:
    """清单中的相对路径以清单所在目录为基准"""
    if os.path.isabs(entry.recording_path):
        return entry.recording_path
    return os.path.join(os.path.dirname(os.path.abspath(manifest_path)), entry.recording_path)


def load_cohort(manifest: SubjectManifest, manifest_path: str,
                config: Optional[IngestConfig] = None, workers: int = 1) -> List[Recording]:
    """并发读取清单中的全部记录，结果顺序与清单一致"""
    config = config or IngestConfig()

    def _load(entry: ManifestEntry) -> Recording:
        return load_recording(resolve_recording_path(manifest_path, entry), config, entry.subject_id)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(_load, manifest.entries))
