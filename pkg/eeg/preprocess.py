"""
预处理模块
计算每个通道在整段记录上的平均值并减去，去除持续偏移
"""

from typing import Union

import numpy as np

from .recording import Recording, CleanRecording, ChannelSeries


def remove_baseline_offset(rec: Union[Recording, CleanRecording]) -> CleanRecording:
    """去除每个通道的基线偏移，记录被减去的均值"""
    channels = []
    offsets = {}
    for channel in rec.channels:
        offset = float(np.mean(channel.samples))
        channels.append(ChannelSeries(channel.name, channel.samples - offset))
        offsets[channel.name] = offset
    return CleanRecording(rec.subject_id, rec.sample_rate_hz, tuple(channels), offsets)
