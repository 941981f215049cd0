"""
流水线控制模块
按阶段串联读取、预处理、特征提取、标注、特征选择、评估和报告，并原子地写出全部产物
"""

import os
import json
import shutil
import logging
import tempfile
from enum import Enum
from dataclasses import dataclass, field
from typing import List, Dict, Optional, Tuple, Any, Callable

from config import RunConfig
from eeg.recording import Recording, CleanRecording, SubjectManifest, Label
from eeg.ingest import IngestConfig, load_manifest, load_cohort
from eeg.preprocess import remove_baseline_offset
from eeg.features import ExtractionConfig, FeatureVector, extract_cohort, write_feature_matrix
from eeg.errors import PipelineError, ValidationError, StageError
from .labeling import (
    LabelMethod, LabelPartition, LabeledDataset, label_cohort, build_dataset,
    manifest_scores, pss_thresholds, write_labels,
)
from .selection import SelectionResult, select_features, write_ttest_report, selection_to_dict
from .classifiers import ClassifierFactory
from .evaluation import (
    EvaluationReport, make_folds, evaluate_grid, feature_combinations, table2_frame, table3_frame,
)
from .report import histogram_frame, boxplot_frame

logger = logging.getLogger(__name__)

ARTIFACTS = (
    "features.csv", "labels.csv", "ttest_report.csv", "evaluation_report.json",
    "table2.csv", "table3.csv", "histogram.csv", "boxplots.csv", "resolved_config.json",
)


class PipelinePhase(Enum):
    """流水线阶段枚举"""
    INGEST = "ingest"
    PREPROCESS = "preprocess"
    EXTRACT = "extract"
    LABEL = "label"
    SELECT = "select"
    EVALUATE = "evaluate"
    REPORT = "report"
    DONE = "done"


@dataclass
class PipelineState:
    """一次运行中各阶段的中间结果"""
    phase: PipelinePhase = PipelinePhase.INGEST
    manifest: Optional[SubjectManifest] = None
    recordings: List[Recording] = field(default_factory=list)
    cleans: List[CleanRecording] = field(default_factory=list)
    vectors: List[FeatureVector] = field(default_factory=list)
    datasets: Dict[LabelMethod, LabeledDataset] = field(default_factory=dict)
    selections: Dict[LabelMethod, SelectionResult] = field(default_factory=dict)
    feature_sets: List[List[str]] = field(default_factory=list)
    report: Optional[EvaluationReport] = None
    history: List[Dict[str, Any]] = field(default_factory=list)

    def log_stage(self, stage: str, **details):
        """记录阶段完成情况"""
        self.history.append({"stage": stage, **details})


class PipelineController:
    """流水线控制器：阶段顺序执行，任何阶段错误都带上阶段名"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.state = PipelineState()
        self.method = LabelMethod.parse(config.method)

    def _run_stage(self, phase: PipelinePhase, action: Callable[[], Any]):
        self.state.phase = phase
        logger.info("阶段: %s", phase.value)
        try:
            return action()
        except StageError:
            raise
        except PipelineError as e:
            raise StageError(phase.value, e) from e

    def ingest(self):
        """读取清单和全部记录"""
        if not self.config.manifest_path:
            raise StageError(PipelinePhase.INGEST.value, ValidationError("必须提供受试者清单路径"))

        def action():
            ingest_config = IngestConfig(montage=list(self.config.montage),
                                         sample_rate_hz=self.config.sample_rate_hz)
            self.state.manifest = load_manifest(self.config.manifest_path)
            self.state.recordings = load_cohort(self.state.manifest, self.config.manifest_path,
                                                ingest_config, self.config.workers)

        self._run_stage(PipelinePhase.INGEST, action)
        self.state.log_stage("ingest", subjects=len(self.state.recordings))

    def preprocess(self):
        self._run_stage(PipelinePhase.PREPROCESS, lambda: setattr(
            self.state, "cleans", [remove_baseline_offset(rec) for rec in self.state.recordings]))
        self.state.log_stage("preprocess", subjects=len(self.state.cleans))

    def extract(self):
        extraction = ExtractionConfig(
            montage=tuple(self.config.montage),
            window_len=self.config.window_len,
            overlap_frac=self.config.overlap_frac,
            rg_direction=self.config.rg_direction,
        )
        self.state.vectors = self._run_stage(
            PipelinePhase.EXTRACT, lambda: extract_cohort(self.state.cleans, extraction, self.config.workers))
        invalid = [vector.subject_id for vector in self.state.vectors if not vector.is_valid]
        self.state.log_stage("extract", subjects=len(self.state.vectors), invalid=invalid)

    def _methods(self) -> List[LabelMethod]:
        """主标注方法在前；对比模式下追加另一种方法"""
        methods = [self.method]
        if self.config.compare_methods:
            methods += [method for method in LabelMethod if method != self.method]
        return methods

    def label(self):
        order = self.state.manifest.subject_ids

        def build(method: LabelMethod) -> LabeledDataset:
            partition: LabelPartition = label_cohort(self.state.manifest, method, self.config.population_sd)
            return build_dataset(partition, self.state.vectors, order)

        self.state.datasets[self.method] = self._run_stage(PipelinePhase.LABEL, lambda: build(self.method))
        for method in self._methods()[1:]:
            try:
                self.state.datasets[method] = build(method)
            except PipelineError as e:
                logger.warning("无法按 %s 标注，跳过对比: %s", method.value, e)
        for method, dataset in self.state.datasets.items():
            counts = dataset.class_counts()
            self.state.log_stage("label", method=method.value, n_stress=counts[Label.STRESS],
                                 n_control=counts[Label.CONTROL], excluded=len(dataset.excluded))

    def select(self):
        def action():
            for method, dataset in self.state.datasets.items():
                try:
                    self.state.selections[method] = select_features(
                        dataset, self.config.alpha_level, self.config.pooled)
                except PipelineError:
                    if method == self.method:
                        raise
                    logger.warning("%s 标注的数据无法做t检验，跳过对比", method.value)

        self._run_stage(PipelinePhase.SELECT, action)
        selection = self.state.selections[self.method]
        logger.info("入选特征 (%d 个): %s", len(selection.selected), ", ".join(selection.selected) or "无")
        self.state.log_stage("select", selected=list(selection.selected))

    def resolve_feature_sets(self) -> List[List[str]]:
        """显式给出的特征组合优先，否则枚举入选特征的组合"""
        dataset = self.state.datasets[self.method]
        if self.config.feature_sets:
            known = set(dataset.feature_names)
            for feature_set in self.config.feature_sets:
                unknown = [name for name in feature_set if name not in known]
                if unknown or not feature_set:
                    raise ValidationError(f"特征组合包含未知特征: {unknown or feature_set}")
            return [list(feature_set) for feature_set in self.config.feature_sets]

        selection = self.state.selections[self.method]
        selected = list(selection.selected)
        if not selected:
            best = min(selection.table, key=lambda test: test.p_value)
            logger.warning("没有特征满足 p < %.3g，退而使用p值最小的特征 %s (p=%.4g)",
                           self.config.alpha_level, best.feature_name, best.p_value)
            selected = [best.feature_name]
        return feature_combinations(selected, self.config.max_combination_size)

    def evaluate(self):
        def action():
            dataset = self.state.datasets[self.method]
            self.state.feature_sets = self.resolve_feature_sets()
            plan = make_folds(dataset, self.config.fold_count, self.config.seed, self.config.stratified)
            specs = ClassifierFactory.create_specs(self.config.classifiers, seed=self.config.seed)
            return evaluate_grid(dataset, specs, self.state.feature_sets, plan, self.config.workers)

        self.state.report = self._run_stage(PipelinePhase.EVALUATE, action)
        self.state.report.metadata["resolved_config"] = self.config.to_dict()
        self.state.report.metadata["selection"] = [selection_to_dict(s) for s in self.state.selections.values()]
        self.state.log_stage("evaluate", combinations=len(self.state.feature_sets),
                             classifiers=list(self.config.classifiers))
        self.state.report.metadata["stages"] = list(self.state.history)

    def write_artifacts(self, out_dir: str):
        """写出全部产物到指定目录"""
        self.state.phase = PipelinePhase.REPORT
        primary = self.state.datasets[self.method]
        write_feature_matrix(self.state.vectors, os.path.join(out_dir, "features.csv"))
        write_labels(primary, os.path.join(out_dir, "labels.csv"))
        write_ttest_report(list(self.state.selections.values()), os.path.join(out_dir, "ttest_report.csv"))
        write_json(self.state.report.to_dict(), os.path.join(out_dir, "evaluation_report.json"))
        write_csv(table2_frame(self.state.report), os.path.join(out_dir, "table2.csv"))
        write_csv(table3_frame(self.state.report), os.path.join(out_dir, "table3.csv"))

        scores = manifest_scores(self.state.manifest)
        thresholds = primary.thresholds or (pss_thresholds(scores, self.config.population_sd)
                                            if len(scores) >= 2 else None)
        if thresholds is not None:
            write_csv(histogram_frame(scores, thresholds), os.path.join(out_dir, "histogram.csv"))
        else:
            logger.warning("PSS分数不足，直方图为空")
            write_csv(histogram_frame([], (0.0, 0.0)).iloc[0:0], os.path.join(out_dir, "histogram.csv"))

        datasets = [self.state.datasets[method] for method in self.state.selections]
        write_csv(boxplot_frame(datasets), os.path.join(out_dir, "boxplots.csv"))
        write_json(self.config.to_dict(), os.path.join(out_dir, "resolved_config.json"))

    def compute(self):
        """执行全部计算阶段（不写文件）"""
        self.ingest()
        self.preprocess()
        self.extract()
        self.label()
        self.select()
        self.evaluate()

    def run(self) -> str:
        """执行流水线，产物先写入临时目录，全部成功后再移到输出目录"""
        out_dir = os.path.abspath(self.config.output_dir)
        check_output_dir(out_dir)
        self.compute()
        parent = os.path.dirname(out_dir)
        os.makedirs(parent, exist_ok=True)
        staging = tempfile.mkdtemp(prefix=".staging-", dir=parent)
        try:
            self.write_artifacts(staging)
            check_output_dir(out_dir)
            if os.path.exists(out_dir):
                shutil.rmtree(out_dir)
            os.rename(staging, out_dir)
        except BaseException:
            shutil.rmtree(staging, ignore_errors=True)
            raise
        self.state.phase = PipelinePhase.DONE
        logger.info("产物已写入 %s", out_dir)
        return out_dir


def check_output_dir(out_dir: str):
    """输出目录只能不存在、为空，或只含上一次运行的产物"""
    if not os.path.exists(out_dir):
        return
    if not os.path.isdir(out_dir):
        raise ValidationError("输出路径不是目录", path=out_dir)
    foreign = sorted(set(os.listdir(out_dir)) - set(ARTIFACTS))
    if foreign:
        raise ValidationError(f"输出目录包含非产物文件，拒绝覆盖: {foreign[:5]}", path=out_dir)


def write_csv(frame, path: str):
    frame.to_csv(path, index=False, lineterminator="\n")


def write_json(data: Dict[str, Any], path: str):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")


def run_pipeline(config: RunConfig) -> Tuple[int, Optional[str]]:
    """端到端运行，返回 (退出码, 产物目录)；出错时不写任何产物"""
    controller = PipelineController(config)
    try:
        return 0, controller.run()
    except PipelineError as e:
        logger.error("%s", e)
        return e.exit_code, None
