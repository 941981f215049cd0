"""
数据读取测试
"""

import unittest
import sys
import os
import json
import tempfile

import numpy as np

# 添加项目根目录到路径
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from eeg.recording import Recording, ChannelSeries, Label, STANDARD_MONTAGE
from eeg.ingest import (
    IngestConfig, load_recording, write_recording, parse_manifest, load_manifest,
    write_manifest, resolve_recording_path, load_cohort,
)
from eeg.errors import (
    MissingChannel, NonFiniteSample, RaggedChannels, BadSampleRate, TooShortRecording,
    DuplicateSubject, PssOutOfRange, PssWrongArity, UnknownLabel, ValidationError,
)


def make_recording(subject_id="S01", n=512, rate=128.0, seed=0):
    rng = np.random.default_rng(seed)
    channels = tuple(ChannelSeries(name, rng.normal(size=n)) for name in STANDARD_MONTAGE)
    return Recording(subject_id, rate, channels)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(str(value) for value in row) + "\n")


class TestLoadRecording(unittest.TestCase):
    """测试记录CSV读取"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def test_write_then_load(self):
        """测试写出的记录可以原样读回"""
        rec = make_recording()
        path = os.path.join(self.dir, "S01.csv")
        write_recording(rec, path)
        loaded = load_recording(path, subject_id="S01")
        self.assertEqual(loaded.channel_names, list(STANDARD_MONTAGE))
        self.assertEqual(loaded.sample_rate_hz, 128.0)
        np.testing.assert_allclose(loaded.as_matrix(), rec.as_matrix(), rtol=0, atol=1e-12)

    def test_channel_order_normalized(self):
        """测试通道顺序按电极排列归一化"""
        header = ["time_s", "AF4", "T8", "Pz", "T7", "AF3"]
        rows = [[i / 128.0, 5, 4, 3, 2, 1] for i in range(300)]
        path = os.path.join(self.dir, "S02.csv")
        write_csv(path, header, rows)
        rec = load_recording(path)
        self.assertEqual(rec.channel_names, list(STANDARD_MONTAGE))
        self.assertEqual(rec.channel("AF3").samples[0], 1.0)
        self.assertEqual(rec.subject_id, "S02")

    def test_missing_channel(self):
        """测试缺少电极通道"""
        header = ["time_s", "AF3", "T7", "Pz", "T8"]
        path = os.path.join(self.dir, "S03.csv")
        write_csv(path, header, [[i / 128.0, 1, 2, 3, 4] for i in range(300)])
        with self.assertRaises(MissingChannel) as ctx:
            load_recording(path, subject_id="S03")
        self.assertEqual(ctx.exception.subject_id, "S03")
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_non_finite_sample(self):
        """测试非有限采样值"""
        header = ["time_s"] + list(STANDARD_MONTAGE)
        rows = [[i / 128.0, 1, 2, 3, 4, 5] for i in range(300)]
        rows[17][3] = "nan"
        path = os.path.join(self.dir, "S04.csv")
        write_csv(path, header, rows)
        with self.assertRaises(NonFiniteSample):
            load_recording(path)

    def test_ragged_channels(self):
        """测试各通道长度不一致"""
        header = ["time_s"] + list(STANDARD_MONTAGE)
        rows = [[i / 128.0, 1, 2, 3, 4, 5] for i in range(300)]
        rows[-1][5] = ""
        path = os.path.join(self.dir, "S05.csv")
        write_csv(path, header, rows)
        with self.assertRaises(RaggedChannels):
            load_recording(path)

    def test_rate_mismatch(self):
        """测试声明的采样率与时间列不一致"""
        rec = make_recording()
        path = os.path.join(self.dir, "S06.csv")
        write_recording(rec, path)
        with open(os.path.join(self.dir, "S06.json"), "w", encoding="utf-8") as f:
            json.dump({"sample_rate_hz": 256.0}, f)
        with self.assertRaises(BadSampleRate):
            load_recording(path)

    def test_rate_from_time_column(self):
        """测试没有采样率文件时从时间列推断"""
        header = ["time_s"] + list(STANDARD_MONTAGE)
        write_csv(os.path.join(self.dir, "S07.csv"), header,
                  [[i / 256.0, 1, 2, 3, 4, 5] for i in range(600)])
        rec = load_recording(os.path.join(self.dir, "S07.csv"))
        self.assertAlmostEqual(rec.sample_rate_hz, 256.0, places=6)

    def test_no_rate_at_all(self):
        """测试既没有时间列也没有声明采样率"""
        write_csv(os.path.join(self.dir, "S08.csv"), list(STANDARD_MONTAGE), [[1, 2, 3, 4, 5]] * 300)
        with self.assertRaises(BadSampleRate):
            load_recording(os.path.join(self.dir, "S08.csv"))
        rec = load_recording(os.path.join(self.dir, "S08.csv"), IngestConfig(sample_rate_hz=128.0))
        self.assertEqual(rec.sample_count, 300)

    def test_too_short(self):
        """测试记录过短"""
        rec = make_recording(n=200)
        path = os.path.join(self.dir, "S09.csv")
        write_recording(rec, path)
        with self.assertRaises(TooShortRecording):
            load_recording(path)


class TestManifest(unittest.TestCase):
    """测试受试者清单"""

    def test_parse_valid(self):
        """测试正常清单"""
        manifest = parse_manifest([
            {"subject_id": "S01", "recording_path": "a.csv", "pss_items": [1] * 10, "expert_label": "stress"},
            {"subject_id": "S02", "recording_path": "b.csv"},
        ])
        self.assertEqual(manifest.subject_ids, ["S01", "S02"])
        self.assertEqual(manifest.get("S01").expert_label, Label.STRESS)
        self.assertEqual(manifest.unlabeled(), ["S02"])

    def test_duplicate_subject(self):
        """测试受试者编号重复"""
        with self.assertRaises(DuplicateSubject):
            parse_manifest([{"subject_id": "S01"}, {"subject_id": "S01"}])

    def test_pss_out_of_range(self):
        """测试PSS题目超出0..4"""
        with self.assertRaises(PssOutOfRange):
            parse_manifest([{"subject_id": "S01", "pss_items": [5] + [0] * 9}])
        with self.assertRaises(PssOutOfRange):
            parse_manifest([{"subject_id": "S01", "pss_items": [-1] + [0] * 9}])

    def test_pss_wrong_arity(self):
        """测试PSS题目数不是10"""
        with self.assertRaises(PssWrongArity):
            parse_manifest([{"subject_id": "S01", "pss_items": [1] * 9}])

    def test_malformed_records(self):
        """测试缺少编号、题目不是数字或为null时给出校验错误"""
        with self.assertRaises(ValidationError) as ctx:
            parse_manifest([{"recording_path": "a.csv"}])
        self.assertEqual(ctx.exception.exit_code, 2)
        with self.assertRaises(ValidationError):
            parse_manifest([{"subject_id": None}])
        with self.assertRaises(ValidationError):
            parse_manifest(["S01"])
        for bad in ("x", None, 1.5, float("nan"), True):
            with self.assertRaises(PssOutOfRange):
                parse_manifest([{"subject_id": "S01", "pss_items": [bad] + [0] * 9}])
        with self.assertRaises(PssWrongArity):
            parse_manifest([{"subject_id": "S01", "pss_items": 12}])
        manifest = parse_manifest([{"subject_id": "S01", "pss_items": [2.0] + [0] * 9}])
        self.assertEqual(manifest.get("S01").pss_items, (2,) + (0,) * 9)

    def test_unknown_label(self):
        """测试未知专家标签"""
        with self.assertRaises(UnknownLabel):
            parse_manifest([{"subject_id": "S01", "expert_label": "anxious"}])

    def test_not_a_list(self):
        """测试清单不是数组"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "manifest.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"subject_id": "S01"}, f)
            with self.assertRaises(ValidationError):
                load_manifest(path)

    def test_missing_files(self):
        """测试清单或记录文件不存在"""
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ValidationError) as ctx:
                load_manifest(os.path.join(tmp, "nope.json"))
            self.assertEqual(ctx.exception.exit_code, 2)
            with self.assertRaises(ValidationError):
                load_recording(os.path.join(tmp, "S01.csv"))

    def test_write_and_load_cohort(self):
        """测试清单写出后按相对路径读取整个队列"""
        with tempfile.TemporaryDirectory() as tmp:
            os.makedirs(os.path.join(tmp, "recordings"))
            records = []
            for index in range(3):
                sid = f"S{index + 1:02d}"
                write_recording(make_recording(sid, seed=index), os.path.join(tmp, "recordings", f"{sid}.csv"))
                records.append({"subject_id": sid, "recording_path": f"recordings/{sid}.csv",
                                "pss_items": [index] * 10})
            path = os.path.join(tmp, "manifest.json")
            write_manifest(parse_manifest(records), path)

            manifest = load_manifest(path)
            self.assertTrue(resolve_recording_path(path, manifest.get("S02")).endswith("S02.csv"))
            cohort = load_cohort(manifest, path, workers=3)
            self.assertEqual([rec.subject_id for rec in cohort], ["S01", "S02", "S03"])
            self.assertEqual(manifest.get("S03").pss_items, (2,) * 10)


if __name__ == '__main__':
    unittest.main()
