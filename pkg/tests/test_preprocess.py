"""
基线校正测试
"""

import unittest
import sys
import os

import numpy as np
from hypothesis import given, settings, strategies as st

# 添加项目根目录到路径
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from eeg.recording import Recording, ChannelSeries
from eeg.preprocess import remove_baseline_offset


def recording_with_offsets(offsets, n=256, seed=0):
    rng = np.random.default_rng(seed)
    channels = tuple(ChannelSeries(f"C{i}", rng.normal(size=n) + offset) for i, offset in enumerate(offsets))
    return Recording("S01", 128.0, channels)


class TestRemoveBaselineOffset(unittest.TestCase):
    """测试去除基线偏移"""

    def test_channel_means_zero(self):
        """测试每个通道去偏移后均值为0"""
        clean = remove_baseline_offset(recording_with_offsets([4000.0, -12.5, 0.0]))
        for channel in clean.channels:
            self.assertLess(abs(np.mean(channel.samples)), 1e-9)

    def test_offsets_recorded(self):
        """测试记录被减去的均值"""
        rec = recording_with_offsets([4000.0, 10.0])
        clean = remove_baseline_offset(rec)
        self.assertAlmostEqual(clean.offset_removed["C0"], float(np.mean(rec.channel("C0").samples)))
        self.assertEqual(clean.sample_rate_hz, rec.sample_rate_hz)
        self.assertEqual(clean.channel_names, rec.channel_names)

    def test_idempotent(self):
        """测试重复校正不再改变信号"""
        once = remove_baseline_offset(recording_with_offsets([123.0]))
        twice = remove_baseline_offset(once)
        np.testing.assert_allclose(twice.channel("C0").samples, once.channel("C0").samples, atol=1e-9)
        self.assertLess(abs(twice.offset_removed["C0"]), 1e-9)

    def test_constant_channel(self):
        """测试常数通道去偏移后全为0"""
        rec = Recording("S01", 128.0, (ChannelSeries("C0", np.full(300, 7.3)),))
        clean = remove_baseline_offset(rec)
        self.assertAlmostEqual(clean.offset_removed["C0"], 7.3, delta=1e-12)
        np.testing.assert_allclose(clean.channel("C0").samples, 0.0, atol=1e-12)

    def test_sine_plus_constant(self):
        """测试整周期正弦加5.0，偏移为5.0且还原出正弦"""
        t = np.arange(256) / 128.0
        sine = np.sin(2 * np.pi * 4.0 * t)
        clean = remove_baseline_offset(Recording("S01", 128.0, (ChannelSeries("C0", sine + 5.0),)))
        self.assertAlmostEqual(clean.offset_removed["C0"], 5.0, delta=1e-9)
        np.testing.assert_allclose(clean.channel("C0").samples, sine, atol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=-1e3, max_value=1e3), st.integers(min_value=0, max_value=1000))
    def test_offset_shifts_with_constant(self, c, seed):
        """测试信号整体加常数时偏移同样加上该常数，校正结果不变"""
        rec = recording_with_offsets([0.0], seed=seed)
        samples = rec.channel("C0").samples
        shifted = Recording("S01", 128.0, (ChannelSeries("C0", samples + c),))
        base, moved = remove_baseline_offset(rec), remove_baseline_offset(shifted)
        self.assertAlmostEqual(moved.offset_removed["C0"], base.offset_removed["C0"] + c, delta=1e-9)
        np.testing.assert_allclose(moved.channel("C0").samples, base.channel("C0").samples, atol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=-1e4, max_value=1e4), st.integers(min_value=0, max_value=1000))
    def test_shape_preserved(self, offset, seed):
        """测试去偏移只改变均值不改变波形"""
        rec = recording_with_offsets([offset], seed=seed)
        clean = remove_baseline_offset(rec)
        original = rec.channel("C0").samples
        np.testing.assert_allclose(np.diff(clean.channel("C0").samples), np.diff(original), atol=1e-8)


if __name__ == '__main__':
    unittest.main()
