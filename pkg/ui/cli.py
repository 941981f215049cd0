"""
命令行界面模块
提供 synth / extract / label / select / train / evaluate / report / run 子命令
"""

import os
import json
import logging
import argparse
from typing import List, Dict, Any, Optional

from config import (
    RunConfig, SYNTH_CONFIG, SPECTRAL_CONFIG, SELECTION_CONFIG, EVALUATION_CONFIG,
    INGEST_CONFIG, get_output_dir, resolve_classifier_name,
)
from eeg.errors import PipelineError
from eeg.ingest import IngestConfig, load_manifest, load_cohort
from eeg.preprocess import remove_baseline_offset
from eeg.features import (
    ExtractionConfig, extract_cohort, channel_psds, write_feature_matrix, read_feature_matrix,
)
from eeg.spectral import write_psd_csv
from eeg.synth import CohortSpec, generate_cohort, write_cohort
from analysis.labeling import (
    LabelMethod, LabeledDataset, label_cohort, build_dataset, labels_frame, write_labels,
    manifest_scores, pss_thresholds,
)
from analysis.selection import select_features, ttest_frame, write_ttest_report
from analysis.classifiers import ClassifierSpec, ClassifierKind, ClassifierFactory, train, save_model
from analysis.evaluation import (
    make_folds, evaluate_grid, feature_combinations, table2_frame, table3_frame,
)
from analysis.report import histogram_frame, boxplot_frame
from analysis.pipeline import run_pipeline, ARTIFACTS, write_csv, write_json
from .utils import (
    setup_logging, print_title, print_success, print_error, print_info, print_frame,
    print_ttest_table, print_artifacts,
)

logger = logging.getLogger(__name__)


def parse_feature_sets(text: Optional[str]) -> List[List[str]]:
    """"a,b;c" -> [["a", "b"], ["c"]]"""
    if not text:
        return []
    return [[name.strip() for name in group.split(",") if name.strip()]
            for group in text.split(";") if group.strip()]


def parse_list(text: Optional[str]) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()] if text else []


def parse_params(pairs: Optional[List[str]]) -> Dict[str, Any]:
    """--param key=value，值按JSON解析，失败时保留字符串"""
    params = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"超参数格式应为 key=value: {pair}")
        key, value = pair.split("=", 1)
        try:
            params[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            params[key.strip()] = value
    return params


def _methods(name: str) -> List[LabelMethod]:
    if name == "both":
        return [LabelMethod.PSS_THRESHOLD, LabelMethod.EXPERT]
    return [LabelMethod.parse(name)]


def load_dataset(manifest_path: str, feature_path: str, method: LabelMethod,
                 population_sd: bool = False) -> LabeledDataset:
    """由清单和特征矩阵组装带标签的数据集"""
    manifest = load_manifest(manifest_path)
    vectors = read_feature_matrix(feature_path)
    partition = label_cohort(manifest, method, population_sd)
    return build_dataset(partition, vectors, manifest.subject_ids)


# ---------------------------------------------------------------- 子命令

def cmd_synth(args) -> int:
    spec = CohortSpec.from_json(args.spec) if args.spec else CohortSpec(**SYNTH_CONFIG)
    if args.seed is not None:
        spec.seed = args.seed
    recordings, manifest = generate_cohort(spec)
    manifest_path = write_cohort(recordings, manifest, args.out, spec)
    print_success(f"已生成 {len(recordings)} 个受试者的合成记录，清单: {manifest_path}")
    return 0


def cmd_extract(args) -> int:
    manifest = load_manifest(args.manifest)
    montage = parse_list(args.montage) or list(INGEST_CONFIG["montage"])
    ingest = IngestConfig(montage=montage, sample_rate_hz=args.sample_rate)
    cleans = [remove_baseline_offset(rec) for rec in load_cohort(manifest, args.manifest, ingest, args.workers or 1)]
    extraction = ExtractionConfig(montage=tuple(montage), window_len=args.window_len, overlap_frac=args.overlap,
                                  rg_direction=args.rg_direction)
    vectors = extract_cohort(cleans, extraction, args.workers or 1)
    write_feature_matrix(vectors, args.out)
    if args.export_psd:
        for clean in cleans:
            for channel, psd in channel_psds(clean, extraction).items():
                write_psd_csv(psd, os.path.join(args.export_psd, clean.subject_id, f"{channel}.csv"))
        print_info(f"功率谱已导出到 {args.export_psd}")
    invalid = sum(1 for vector in vectors if not vector.is_valid)
    print_success(f"特征矩阵已写入 {args.out} ({len(vectors)} 个受试者, {invalid} 个无效)")
    return 0


def cmd_label(args) -> int:
    dataset = load_dataset(args.manifest, args.feature_matrix, LabelMethod.parse(args.method), args.population_sd)
    write_labels(dataset, args.out)
    print_frame(labels_frame(dataset), f"标注结果 ({dataset.method.value})")
    if dataset.thresholds:
        print_info(f"PSS阈值: {dataset.thresholds[0]:.2f} / {dataset.thresholds[1]:.2f}")
    print_success(f"标签已写入 {args.out}")
    return 0


def cmd_select(args) -> int:
    results = []
    for method in _methods(args.method):
        dataset = load_dataset(args.manifest, args.feature_matrix, method, args.population_sd)
        results.append(select_features(dataset, args.alpha, args.pooled))
    write_ttest_report(results, args.out)
    print_ttest_table(ttest_frame(results))
    for result in results:
        print_info(f"{result.method}: 入选 {', '.join(result.selected) or '无'}")
    print_success(f"t检验结果已写入 {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = load_dataset(args.manifest, args.feature_matrix, LabelMethod.parse(args.method), args.population_sd)
    names = parse_list(args.features) or dataset.feature_names
    kind = ClassifierKind(resolve_classifier_name(args.classifier))
    spec = ClassifierSpec(kind, parse_params(args.param), args.seed)
    model = train(spec, dataset.matrix(names), dataset.targets(), names)
    save_model(model, args.out)
    print_success(f"{kind.value} 模型已写入 {args.out} (特征: {', '.join(names)})")
    return 0


def cmd_evaluate(args) -> int:
    method = LabelMethod.parse(args.method)
    dataset = load_dataset(args.manifest, args.feature_matrix, method, args.population_sd)
    feature_sets = parse_feature_sets(args.feature_sets)
    if not feature_sets:
        selection = select_features(dataset, args.alpha, args.pooled)
        selected = selection.selected or [min(selection.table, key=lambda test: test.p_value).feature_name]
        feature_sets = feature_combinations(selected, args.max_combination_size)
    classifiers = [resolve_classifier_name(name) for name in parse_list(args.classifiers)]
    plan = make_folds(dataset, args.folds, args.seed, not args.no_stratify)
    report = evaluate_grid(dataset, ClassifierFactory.create_specs(classifiers, seed=args.seed),
                           feature_sets, plan, args.workers or 1)
    os.makedirs(args.out, exist_ok=True)
    write_json(report.to_dict(), os.path.join(args.out, "evaluation_report.json"))
    table2, table3 = table2_frame(report), table3_frame(report)
    write_csv(table2, os.path.join(args.out, "table2.csv"))
    write_csv(table3, os.path.join(args.out, "table3.csv"))
    print_frame(table2, "各特征组合的准确率 (%)")
    print_frame(table3, "各分类器的最佳结果")
    print_success(f"评估结果已写入 {args.out}")
    return 0


def cmd_report(args) -> int:
    manifest = load_manifest(args.manifest)
    datasets = [load_dataset(args.manifest, args.feature_matrix, method, args.population_sd)
                for method in _methods(args.method)]
    scores = manifest_scores(manifest)
    thresholds = pss_thresholds(scores, args.population_sd)
    histogram = histogram_frame(scores, thresholds)
    boxplots = boxplot_frame(datasets, parse_list(args.features) or None)
    os.makedirs(args.out, exist_ok=True)
    write_csv(histogram, os.path.join(args.out, "histogram.csv"))
    write_csv(boxplots, os.path.join(args.out, "boxplots.csv"))
    print_frame(histogram[histogram["count"] > 0], "PSS分数分布")
    print_frame(boxplots, "箱线图统计", ["feature", "method", "group", "n", "median", "q1", "q3"])
    print_success(f"报告数据已写入 {args.out}")
    return 0


def run_config_from_args(args) -> RunConfig:
    """配置文件为基础，命令行参数覆盖"""
    overrides = {
        "manifest_path": args.manifest,
        "output_dir": args.out,
        "method": args.method,
        "population_sd": True if args.population_sd else None,
        "alpha_level": args.alpha,
        "pooled": True if args.pooled else None,
        "compare_methods": True if args.compare_methods else None,
        "classifiers": parse_list(args.classifiers) or None,
        "feature_sets": parse_feature_sets(args.feature_sets) or None,
        "fold_count": args.folds,
        "stratified": False if args.no_stratify else None,
        "seed": args.seed,
        "max_combination_size": args.max_combination_size,
        "window_len": args.window_len,
        "overlap_frac": args.overlap,
        "rg_direction": args.rg_direction,
        "sample_rate_hz": args.sample_rate,
        "montage": parse_list(args.montage) or None,
        "workers": args.workers,
    }
    if args.config:
        return RunConfig.from_json(args.config, overrides)
    return RunConfig.from_dict({key: value for key, value in overrides.items() if value is not None})


def cmd_run(args) -> int:
    config = run_config_from_args(args)
    print_title("长期压力EEG分类流水线")
    status, out_dir = run_pipeline(config)
    if status == 0:
        print_artifacts(out_dir, list(ARTIFACTS))
    return status


# ---------------------------------------------------------------- 参数定义

def _add_manifest(parser, required: bool = True):
    parser.add_argument("--manifest", required=required, help="受试者清单JSON")


def _add_labeling(parser, allow_both: bool = False):
    choices = ["pss", "expert", "both"] if allow_both else ["pss", "expert"]
    parser.add_argument("--method", choices=choices, default=None, help="标注方法")
    parser.add_argument("--population-sd", action="store_true", help="阈值使用总体标准差")


def _add_spectral(parser, defaults: bool = True):
    parser.add_argument("--window-len", type=int, default=SPECTRAL_CONFIG["window_len"] if defaults else None)
    parser.add_argument("--overlap", type=float, default=SPECTRAL_CONFIG["overlap_frac"] if defaults else None)
    parser.add_argument("--rg-direction", choices=["gamma_over_slow", "slow_over_gamma"],
                        default=SPECTRAL_CONFIG["rg_direction"] if defaults else None)
    parser.add_argument("--sample-rate", type=float, default=None, help="声明的采样率（Hz）")
    parser.add_argument("--montage", default=None, help="逗号分隔的电极排列，如 AF3,T7,Pz,T8,AF4")


def _add_selection(parser, defaults: bool = True):
    parser.add_argument("--alpha", type=float, default=SELECTION_CONFIG["alpha_level"] if defaults else None,
                        help="显著性水平")
    parser.add_argument("--pooled", action="store_true", help="使用合并方差t检验")


def _add_evaluation(parser, defaults: bool = True):
    parser.add_argument("--classifiers", default=",".join(EVALUATION_CONFIG["classifiers"]) if defaults else None,
                        help="逗号分隔，如 svm,nb,knn,lr,mlp")
    parser.add_argument("--feature-sets", default=None, help='特征组合，如 "alpha_asym;alpha_asym,rg_T8"')
    parser.add_argument("--folds", type=int, default=EVALUATION_CONFIG["fold_count"] if defaults else None)
    parser.add_argument("--seed", type=int, default=EVALUATION_CONFIG["seed"] if defaults else None)
    parser.add_argument("--no-stratify", action="store_true", help="不分层划分折")
    parser.add_argument("--max-combination-size", type=int,
                        default=EVALUATION_CONFIG["max_combination_size"] if defaults else None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eeg-stress", description="基于EEG的长期压力分类流水线")
    parser.add_argument("--no-color", action="store_true", help="关闭彩色输出")
    parser.add_argument("--verbose", "-v", action="store_true", help="显示调试信息")
    parser.add_argument("--workers", type=int, default=None, help="并发线程数（默认1）")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="生成合成队列")
    p.add_argument("--spec", default=None, help="CohortSpec JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("extract", help="提取特征矩阵")
    _add_manifest(p)
    _add_spectral(p)
    p.add_argument("--out", default="features.csv", help="输出路径（.csv 或 .json）")
    p.add_argument("--export-psd", default=None, help="导出每个受试者每个通道的功率谱到该目录")
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("label", help="标注受试者")
    _add_manifest(p)
    _add_labeling(p)
    p.add_argument("--feature-matrix", required=True)
    p.add_argument("--out", default="labels.csv")
    p.set_defaults(handler=cmd_label, method="pss")

    p = sub.add_parser("select", help="t检验特征选择")
    _add_manifest(p)
    _add_labeling(p, allow_both=True)
    _add_selection(p)
    p.add_argument("--feature-matrix", required=True)
    p.add_argument("--out", default="ttest_report.csv")
    p.set_defaults(handler=cmd_select, method="pss")

    p = sub.add_parser("train", help="训练单个分类器")
    _add_manifest(p)
    _add_labeling(p)
    p.add_argument("--feature-matrix", required=True)
    p.add_argument("--classifier", required=True)
    p.add_argument("--features", default=None, help="逗号分隔的特征名")
    p.add_argument("--param", action="append", help="超参数 key=value，可重复")
    p.add_argument("--seed", type=int, default=EVALUATION_CONFIG["seed"])
    p.add_argument("--out", default="model.json")
    p.set_defaults(handler=cmd_train, method="pss")

    p = sub.add_parser("evaluate", help="交叉验证评估")
    _add_manifest(p)
    _add_labeling(p)
    _add_selection(p)
    _add_evaluation(p)
    p.add_argument("--feature-matrix", required=True)
    p.add_argument("--out", default=get_output_dir())
    p.set_defaults(handler=cmd_evaluate, method="pss")

    p = sub.add_parser("report", help="直方图与箱线图数据")
    _add_manifest(p)
    _add_labeling(p, allow_both=True)
    p.add_argument("--feature-matrix", required=True)
    p.add_argument("--features", default=None, help="只统计这些特征")
    p.add_argument("--out", default=get_output_dir())
    p.set_defaults(handler=cmd_report, method="pss")

    p = sub.add_parser("run", help="端到端运行")
    p.add_argument("--config", default=None, help="RunConfig JSON")
    _add_manifest(p, required=False)
    _add_labeling(p)
    _add_spectral(p, defaults=False)
    _add_selection(p, defaults=False)
    _add_evaluation(p, defaults=False)
    p.add_argument("--compare-methods", action="store_true", help="同时输出两种标注的t检验表")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_run)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """解析参数并执行子命令，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, colors=False if args.no_color else None)
    try:
        return args.handler(args)
    except PipelineError as e:
        print_error(str(e))
        return e.exit_code
    except (ValueError, FileNotFoundError) as e:
        print_error(str(e))
        return 2
