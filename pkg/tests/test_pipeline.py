"""
端到端流水线测试
"""

import unittest
import sys
import os
import json
import tempfile
import shutil

import pandas as pd

# 添加项目根目录到路径
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from config import RunConfig
from eeg.preprocess import remove_baseline_offset
from eeg.features import extract_cohort
from eeg.synth import CohortSpec, generate_cohort, write_cohort
from analysis.labeling import LabelMethod, label_cohort, build_dataset
from analysis.selection import select_features
from analysis.classifiers import ClassifierSpec, ClassifierKind
from analysis.evaluation import make_folds, cross_validate
from analysis.pipeline import ARTIFACTS, PipelineController, PipelinePhase, run_pipeline
from ui.cli import main as cli_main, build_parser, run_config_from_args

FEATURE_SETS = [["alpha_asym"], ["alpha_asym", "alpha_frontal"]]
CLASSIFIERS = ["svm", "naive_bayes", "knn"]


def read_tree(root):
    files = {}
    for name in sorted(os.listdir(root)):
        with open(os.path.join(root, name), "rb") as f:
            files[name] = f.read()
    return files


def in_memory_dataset(spec, method=LabelMethod.EXPERT):
    recordings, manifest = generate_cohort(spec)
    vectors = extract_cohort([remove_baseline_offset(rec) for rec in recordings])
    return build_dataset(label_cohort(manifest, method), vectors, manifest.subject_ids)


class TestRunPipeline(unittest.TestCase):
    """测试完整运行"""

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.mkdtemp()
        spec = CohortSpec(n_stress=10, n_control=10, n_neutral=4, duration_s=30.0, seed=5)
        recordings, manifest = generate_cohort(spec)
        cls.manifest_path = write_cohort(recordings, manifest, os.path.join(cls.tmp, "cohort"), spec)

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)

    def make_config(self, out_name, **overrides):
        params = dict(manifest_path=self.manifest_path, output_dir=os.path.join(self.tmp, out_name),
                      classifiers=list(CLASSIFIERS), feature_sets=[list(s) for s in FEATURE_SETS])
        params.update(overrides)
        return RunConfig(**params)

    def test_artifacts(self):
        """测试全部产物都已写出且内容一致"""
        status, out_dir = run_pipeline(self.make_config("run"))
        self.assertEqual(status, 0)
        for name in ARTIFACTS:
            self.assertTrue(os.path.isfile(os.path.join(out_dir, name)), name)

        features = pd.read_csv(os.path.join(out_dir, "features.csv"))
        self.assertEqual(len(features), 24)
        labels = pd.read_csv(os.path.join(out_dir, "labels.csv"), keep_default_na=False)
        self.assertEqual((labels["label"] == "stress").sum(), 10)
        self.assertEqual((labels["label"] == "excluded").sum(), 4)

        with open(os.path.join(out_dir, "evaluation_report.json"), encoding="utf-8") as f:
            report = json.load(f)
        self.assertEqual(len(report["results"]), len(CLASSIFIERS) * len(FEATURE_SETS))
        self.assertEqual(report["metadata"]["resolved_config"]["classifiers"], CLASSIFIERS)
        table2 = pd.read_csv(os.path.join(out_dir, "table2.csv"))
        self.assertEqual(table2["feature_set"].tolist(), ["alpha_asym", "alpha_asym+alpha_frontal"])
        for classifier in CLASSIFIERS:
            self.assertGreaterEqual(table2[classifier].iloc[0], 85.0, classifier)
        self.assertFalse(any(name.startswith(".staging-") for name in os.listdir(self.tmp)))

    def test_deterministic(self):
        """测试相同配置运行两次产物逐字节相同"""
        config = self.make_config("same")
        _, out_dir = run_pipeline(config)
        first = read_tree(out_dir)
        _, out_dir = run_pipeline(config)
        self.assertEqual(read_tree(out_dir), first)

    def test_missing_manifest(self):
        """测试清单不存在时退出码为2且不写产物"""
        config = self.make_config("missing", manifest_path=os.path.join(self.tmp, "nope.json"))
        status, out_dir = run_pipeline(config)
        self.assertEqual(status, 2)
        self.assertIsNone(out_dir)
        self.assertFalse(os.path.exists(config.output_dir))

    def test_method_changes_labels(self):
        """测试PSS标注与专家标注写出各自的标签文件"""
        _, pss_dir = run_pipeline(self.make_config("pss", method="pss"))
        _, expert_dir = run_pipeline(self.make_config("expert", method="expert", compare_methods=True))
        pss = pd.read_csv(os.path.join(pss_dir, "labels.csv"), keep_default_na=False)
        expert = pd.read_csv(os.path.join(expert_dir, "labels.csv"), keep_default_na=False)
        self.assertIn("neutral_band", set(pss["reason"]))
        self.assertIn("unlabeled", set(expert["reason"]))
        ttest = pd.read_csv(os.path.join(expert_dir, "ttest_report.csv"))
        self.assertEqual(set(ttest["method"]), {"expert", "pss_threshold"})

    def test_controller_stages(self):
        """测试控制器按阶段执行并记录历史"""
        controller = PipelineController(self.make_config("stages", feature_sets=[], max_combination_size=1))
        controller.compute()
        stages = [entry["stage"] for entry in controller.state.history]
        self.assertEqual(stages, ["ingest", "preprocess", "extract", "label", "select", "evaluate"])
        self.assertEqual(controller.state.phase, PipelinePhase.EVALUATE)
        self.assertIn("alpha_asym", controller.state.selections[LabelMethod.PSS_THRESHOLD].selected)
        self.assertIn(["alpha_asym"], controller.state.feature_sets)

    def test_refuses_foreign_output_dir(self):
        """测试输出目录含有其他文件时拒绝覆盖，原文件保留"""
        out_dir = os.path.join(self.tmp, "mywork")
        os.makedirs(out_dir)
        with open(os.path.join(out_dir, "thesis.tex"), "w", encoding="utf-8") as f:
            f.write("draft")
        status, written = run_pipeline(self.make_config("mywork"))
        self.assertEqual(status, 2)
        self.assertIsNone(written)
        self.assertEqual(os.listdir(out_dir), ["thesis.tex"])
        self.assertFalse(any(name.startswith(".staging-") for name in os.listdir(self.tmp)))

    def test_cli_montage(self):
        """测试 --montage 决定通道顺序和特征列顺序"""
        montage = "AF4,AF3,T8,T7,Pz"
        features = os.path.join(self.tmp, "montage_features.csv")
        status = cli_main(["--no-color", "extract", "--manifest", self.manifest_path,
                           "--montage", montage, "--out", features])
        self.assertEqual(status, 0)
        columns = list(pd.read_csv(features).columns)
        self.assertEqual(columns[1], "delta_AF4")
        self.assertEqual(columns[9], "delta_AF3")
        args = build_parser().parse_args(["run", "--manifest", self.manifest_path, "--montage", montage])
        self.assertEqual(run_config_from_args(args).montage, montage.split(","))
        self.assertEqual(cli_main(["--no-color", "extract", "--manifest", self.manifest_path,
                                   "--montage", "AF3,T7,Pz,T8,Oz", "--out", features]), 2)

    def test_cli(self):
        """测试命令行生成合成数据并运行"""
        cohort = os.path.join(self.tmp, "cli_cohort")
        out = os.path.join(self.tmp, "cli_out")
        self.assertEqual(cli_main(["--no-color", "synth", "--out", cohort, "--seed", "3"]), 0)
        manifest = os.path.join(cohort, "manifest.json")
        status = cli_main(["--no-color", "run", "--manifest", manifest, "--out", out,
                           "--classifiers", "knn", "--feature-sets", "alpha_asym", "--folds", "5"])
        self.assertEqual(status, 0)
        self.assertTrue(os.path.isfile(os.path.join(out, "table3.csv")))
        self.assertEqual(cli_main(["--no-color", "run", "--manifest", os.path.join(self.tmp, "x.json"),
                                   "--out", os.path.join(self.tmp, "cli_bad")]), 2)


class TestAcceptance(unittest.TestCase):
    """测试在合成队列上恢复已知效应"""

    def test_effect_recovered(self):
        """测试有效应时SVM在alpha_asym上的准确率，且概率不是恒为0.5"""
        good_accuracy, selected = 0, 0
        for seed in range(10):
            spec = CohortSpec(n_stress=10, n_control=10, n_neutral=0, duration_s=30.0, seed=seed)
            dataset = in_memory_dataset(spec)
            if "alpha_asym" in select_features(dataset).selected:
                selected += 1
            plan = make_folds(dataset, 10, seed=seed)
            result = cross_validate(ClassifierSpec(ClassifierKind.SVM, seed=seed), dataset, plan, ["alpha_asym"])
            if result.metrics.accuracy_pct >= 85.0:
                good_accuracy += 1
            p_stress = [p for fold in result.folds for p in fold.p_stress]
            self.assertGreater(max(abs(p - 0.5) for p in p_stress), 0.1)
        self.assertGreaterEqual(good_accuracy, 8)
        self.assertGreaterEqual(selected, 9)

    def test_null_effect(self):
        """测试没有效应时准确率接近随机"""
        accuracies, kappas = [], []
        for seed in range(10):
            spec = CohortSpec(n_stress=10, n_control=10, n_neutral=0, duration_s=30.0,
                              asymmetry_effect=1.0, seed=seed)
            dataset = in_memory_dataset(spec)
            plan = make_folds(dataset, 10, seed=seed)
            result = cross_validate(ClassifierSpec(ClassifierKind.SVM, seed=seed), dataset, plan, ["alpha_asym"])
            accuracies.append(result.metrics.accuracy_pct)
            kappas.append(result.metrics.kappa)
        mean_accuracy = sum(accuracies) / len(accuracies)
        self.assertTrue(35.0 <= mean_accuracy <= 65.0, mean_accuracy)
        self.assertLess(abs(sum(kappas) / len(kappas)), 0.3)


if __name__ == '__main__':
    unittest.main()
