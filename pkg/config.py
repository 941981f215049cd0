"""
项目配置文件
包含各阶段默认参数、环境变量以及运行配置的解析
"""

import os
import json
from dataclasses import dataclass, field, asdict
from typing import Dict, Any, List, Optional

# 默认电极排列（顺序即CSV表头顺序）
DEFAULT_MONTAGE = ["AF3", "T7", "Pz", "T8", "AF4"]

# 数据读取配置
INGEST_CONFIG = {
    "montage": DEFAULT_MONTAGE,
    "sample_rate_hz": None,          # None表示从时间列推断
    "rate_tolerance": 0.01,          # 推断采样率的相对容差
    "min_samples": 256,              # 少于两个Welch窗口的记录被拒绝
}

# 频谱配置
SPECTRAL_CONFIG = {
    "window_len": 128,
    "overlap_frac": 0.5,
    "rg_direction": "gamma_over_slow",  # gamma_over_slow, slow_over_gamma
}

# 标注配置
LABEL_CONFIG = {
    "method": "pss",                 # pss, expert
    "population_sd": False,          # False表示样本标准差(n-1)
}

# 特征选择配置
SELECTION_CONFIG = {
    "alpha_level": 0.05,
    "pooled": False,                 # True使用Student合并方差t检验
    "compare_methods": False,        # True时同时输出PSS和专家两种标注的t检验表
}

# 分类器默认超参数
CLASSIFIER_CONFIG = {
    "svm": {"C": 1.0, "kernel": "linear", "gamma": None, "tol": 1e-3, "max_iter": 100000},
    "naive_bayes": {"var_floor": 1e-9},
    "knn": {"k": 5},
    "logistic_regression": {"l2": 1e-2, "grad_tol": 1e-8, "max_iter": 10000},
    "mlp": {"hidden_units": 10, "learning_rate": 0.1, "epochs": 2000, "init_range": 0.5},
}

# 评估配置
EVALUATION_CONFIG = {
    "fold_count": 10,
    "stratified": True,
    "seed": 42,
    "classifiers": ["svm", "naive_bayes", "knn", "logistic_regression", "mlp"],
    "max_combination_size": 3,
}

# 合成数据配置
SYNTH_CONFIG = {
    "n_stress": 10,
    "n_control": 10,
    "n_neutral": 13,
    "sample_rate_hz": 128.0,
    "duration_s": 180.0,
    "asymmetry_effect": 2.0,
    "noise_sd": 2.0,
    "amplitude_jitter": 0.15,
    "seed": 7,
}

# UI配置
UI_CONFIG = {
    "enable_colors": not os.getenv("EEG_STRESS_NO_COLOR"),
    "show_debug_info": False,
}

# 分类器简称
CLASSIFIER_ALIASES = {
    "svm": "svm",
    "nb": "naive_bayes",
    "naive_bayes": "naive_bayes",
    "knn": "knn",
    "lr": "logistic_regression",
    "logistic_regression": "logistic_regression",
    "mlp": "mlp",
}


def get_output_dir() -> str:
    """获取默认输出目录"""
    return os.getenv("EEG_STRESS_OUTPUT_DIR", "artifacts")


def resolve_classifier_name(name: str) -> str:
    """把简称转换为分类器全名"""
    key = name.strip().lower()
    if key not in CLASSIFIER_ALIASES:
        raise ValueError(f"不支持的分类器: {name}")
    return CLASSIFIER_ALIASES[key]


def get_classifier_defaults(kind: str) -> Dict[str, Any]:
    """获取分类器默认超参数的副本"""
    kind = resolve_classifier_name(kind)
    return dict(CLASSIFIER_CONFIG[kind])


@dataclass
class RunConfig:
    """一次完整运行的配置，所有字段都有默认值"""
    manifest_path: Optional[str] = None
    output_dir: str = field(default_factory=get_output_dir)
    montage: List[str] = field(default_factory=lambda: list(INGEST_CONFIG["montage"]))
    sample_rate_hz: Optional[float] = INGEST_CONFIG["sample_rate_hz"]
    window_len: int = SPECTRAL_CONFIG["window_len"]
    overlap_frac: float = SPECTRAL_CONFIG["overlap_frac"]
    rg_direction: str = SPECTRAL_CONFIG["rg_direction"]
    method: str = LABEL_CONFIG["method"]
    population_sd: bool = LABEL_CONFIG["population_sd"]
    alpha_level: float = SELECTION_CONFIG["alpha_level"]
    pooled: bool = SELECTION_CONFIG["pooled"]
    compare_methods: bool = SELECTION_CONFIG["compare_methods"]
    classifiers: List[str] = field(default_factory=lambda: list(EVALUATION_CONFIG["classifiers"]))
    feature_sets: List[List[str]] = field(default_factory=list)
    fold_count: int = EVALUATION_CONFIG["fold_count"]
    stratified: bool = EVALUATION_CONFIG["stratified"]
    seed: int = EVALUATION_CONFIG["seed"]
    max_combination_size: int = EVALUATION_CONFIG["max_combination_size"]
    workers: int = 1

    def __post_init__(self):
        self.classifiers = [resolve_classifier_name(name) for name in self.classifiers]
        validate_run_config(self)

    def to_dict(self) -> Dict[str, Any]:
        """返回完整解析后的配置（写入每个输出文件）"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """从字典构建，未知键报错"""
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"未知的配置项: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """读取JSON配置文件，命令行参数覆盖文件内容"""
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        data.update({key: value for key, value in (overrides or {}).items() if value is not None})
        return cls.from_dict(data)


def validate_run_config(config: RunConfig):
    """验证运行配置是否有效"""
    if config.window_len < 2:
        raise ValueError(f"窗口长度无效: {config.window_len}")
    if not 0 <= config.overlap_frac < 1:
        raise ValueError(f"重叠比例必须在[0, 1)内: {config.overlap_frac}")
    if config.rg_direction not in ("gamma_over_slow", "slow_over_gamma"):
        raise ValueError(f"不支持的RG方向: {config.rg_direction}")
    if config.method not in ("pss", "expert"):
        raise ValueError(f"不支持的标注方法: {config.method}")
    if not 0 <= config.alpha_level <= 1:
        raise ValueError(f"显著性水平必须在[0, 1]内: {config.alpha_level}")
    if config.fold_count < 2:
        raise ValueError(f"折数至少为2: {config.fold_count}")
    if config.workers < 1:
        raise ValueError(f"工作线程数至少为1: {config.workers}")
    if len(set(config.montage)) != len(config.montage):
        raise ValueError(f"电极名称重复: {config.montage}")


if __name__ == "__main__":
    print("=== 默认运行配置 ===")
    print(json.dumps(RunConfig().to_dict(), ensure_ascii=False, indent=2))
    print(f"\n输出目录: {get_output_dir()}")
