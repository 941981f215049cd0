"""
分类器模块
从基本原理实现SVM、朴素贝叶斯、KNN、逻辑回归和多层感知机，提供统一的训练/预测接口
"""

import json
import logging
from abc import ABC, abstractmethod
from enum import Enum
from dataclasses import dataclass, field
from typing import List, Dict, Any, Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logsumexp

from config import CLASSIFIER_CONFIG
from eeg.recording import Label
from eeg.errors import (
    InvalidHyperparameter, SingleClassTraining, NonFiniteFeature, NoConvergence, ArityMismatch,
)

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1


class ClassifierKind(Enum):
    """分类器种类"""
    SVM = "svm"
    NAIVE_BAYES = "naive_bayes"
    KNN = "knn"
    LOGISTIC_REGRESSION = "logistic_regression"
    MLP = "mlp"


@dataclass
class ClassifierSpec:
    """分类器配置：种类、超参数、随机种子"""
    kind: ClassifierKind
    hyperparams: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, ClassifierKind):
            self.kind = ClassifierKind(self.kind)

    def resolved(self) -> Dict[str, Any]:
        """合并默认值并校验后的超参数"""
        defaults = dict(CLASSIFIER_CONFIG[self.kind.value])
        unknown = set(self.hyperparams) - set(defaults)
        if unknown:
            raise InvalidHyperparameter(f"{self.kind.value} 不支持的超参数: {sorted(unknown)}")
        defaults.update(self.hyperparams)
        validate_hyperparams(self.kind, defaults)
        return defaults


def validate_hyperparams(kind: ClassifierKind, params: Dict[str, Any]):
    """按种类校验超参数"""
    def require(condition: bool, message: str):
        if not condition:
            raise InvalidHyperparameter(f"{kind.value}: {message}")

    if kind == ClassifierKind.SVM:
        require(params["C"] > 0, f"C必须大于0: {params['C']}")
        require(params["kernel"] in ("linear", "rbf"), f"不支持的核函数: {params['kernel']}")
        require(params["gamma"] is None or params["gamma"] > 0, f"gamma必须大于0: {params['gamma']}")
        require(params["tol"] > 0, "tol必须大于0")
    elif kind == ClassifierKind.NAIVE_BAYES:
        require(params["var_floor"] > 0, "方差下限必须大于0")
    elif kind == ClassifierKind.KNN:
        k = params["k"]
        require(isinstance(k, int) and k >= 1 and k % 2 == 1, f"k必须是正奇数: {k}")
    elif kind == ClassifierKind.LOGISTIC_REGRESSION:
        require(params["l2"] >= 0, "l2必须非负")
        require(params["max_iter"] >= 1, "max_iter至少为1")
    elif kind == ClassifierKind.MLP:
        require(isinstance(params["hidden_units"], int) and params["hidden_units"] >= 1,
                f"隐藏单元数至少为1: {params['hidden_units']}")
        require(params["learning_rate"] > 0, "学习率必须大于0")
        require(params["epochs"] >= 1, "epochs至少为1")
        require(params["init_range"] > 0, "初始化范围必须大于0")


@dataclass
class FeatureScaler:
    """标准化：只用训练数据的均值和标准差"""
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "FeatureScaler":
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.scale

    def to_dict(self) -> Dict[str, List[float]]:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, List[float]]) -> "FeatureScaler":
        return cls(np.asarray(data["mean"], dtype=float), np.asarray(data["scale"], dtype=float))


def knn_distance(a: np.ndarray, b: np.ndarray) -> float:
    """欧氏距离，对全部属性求和"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ArityMismatch(f"向量维数不一致: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def mlp_loss(y: float, f_x: float) -> float:
    """平方误差 E = ½(y - f(x))²"""
    return 0.5 * (y - f_x) ** 2


class Classifier(ABC):
    """分类器基类：训练后不可变，可在线程间共享用于预测"""

    kind: ClassifierKind

    def __init__(self, spec: ClassifierSpec):
        self.spec = spec
        self.hyperparams = spec.resolved()
        self.scaler: Optional[FeatureScaler] = None
        self.feature_names: List[str] = []
        self.class_prior: Dict[str, float] = {}

    @property
    def n_features(self) -> int:
        return 0 if self.scaler is None else len(self.scaler.mean)

    @property
    def is_trained(self) -> bool:
        return self.scaler is not None

    def fit(self, X: np.ndarray, y: np.ndarray, feature_names: Optional[List[str]] = None) -> "Classifier":
        """训练：校验输入、拟合标准化，再交给具体实现"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=int)
        if X.shape[0] != y.shape[0]:
            raise ArityMismatch(f"样本数与标签数不一致: {X.shape[0]} vs {y.shape[0]}")
        if not np.all(np.isfinite(X)):
            raise NonFiniteFeature("训练特征中含有非有限值")
        n_stress = int(np.sum(y == 1))
        n_control = int(np.sum(y == 0))
        if n_stress + n_control != len(y):
            raise SingleClassTraining("标签只能是0(对照组)或1(压力组)")
        if n_stress < 2 or n_control < 2:
            raise SingleClassTraining(f"每类至少需要2个样本 (压力组 {n_stress}, 对照组 {n_control})")

        self.feature_names = list(feature_names or [f"x{i}" for i in range(X.shape[1])])
        self.class_prior = {"stress": n_stress / len(y), "control": n_control / len(y)}
        self.scaler = FeatureScaler.fit(X)
        self._fit(self.scaler.transform(X), y)
        return self

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        if not self.is_trained:
            raise ValueError("模型尚未训练")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ArityMismatch(f"特征维数 {X.shape[1]} 与模型的 {self.n_features} 不一致")
        return self.scaler.transform(X)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """每个样本属于压力组的概率"""
        return np.clip(self._predict_proba(self._check_input(X)), 0.0, 1.0)

    def predict_labels(self, X: np.ndarray) -> np.ndarray:
        """整数标签；概率恰为0.5时判为对照组"""
        return (self.predict_proba(X) > 0.5).astype(int)

    def predict(self, x: np.ndarray) -> Tuple[Label, float]:
        """单个样本的 (标签, 压力组概率)"""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ArityMismatch("predict 只接受单个特征向量")
        labels = self.predict_labels(x[None, :])
        p_stress = float(self.predict_proba(x[None, :])[0])
        return Label.from_int(labels[0]), p_stress

    def to_dict(self) -> Dict[str, Any]:
        """版本化的模型文档"""
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind.value,
            "hyperparams": self.hyperparams,
            "seed": self.spec.seed,
            "feature_names": self.feature_names,
            "class_prior": self.class_prior,
            "scaler": self.scaler.to_dict(),
            "parameters": self._get_parameters(),
        }

    @abstractmethod
    def _fit(self, Z: np.ndarray, y: np.ndarray):
        """在标准化后的数据上训练"""
        pass

    @abstractmethod
    def _predict_proba(self, Z: np.ndarray) -> np.ndarray:
        """在标准化后的数据上计算压力组概率"""
        pass

    @abstractmethod
    def _get_parameters(self) -> Dict[str, Any]:
        pass

    @abstractmethod
    def _set_parameters(self, data: Dict[str, Any]):
        pass


# ---------------------------------------------------------------- SVM

def _kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    sq = np.sum(A ** 2, axis=1)[:, None] + np.sum(B ** 2, axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


def platt_objective(params: np.ndarray, decision: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    """Platt sigmoid的负对数似然及其对 (A, B) 的梯度，z = A·f + B"""
    z = params[0] * decision + params[1]
    value = float(np.sum(target * np.logaddexp(0.0, z) + (1.0 - target) * np.logaddexp(0.0, -z)))
    residual = expit(z) - (1.0 - target)
    return value, np.array([np.sum(residual * decision), np.sum(residual)])


class SvmClassifier(Classifier):
    """软间隔SVM，SMO求解（每步选最大违反对），Platt sigmoid输出概率"""

    kind = ClassifierKind.SVM

    def __init__(self, spec: ClassifierSpec):
        super().__init__(spec)
        self.support_vectors = np.empty((0, 0))
        self.dual_coef = np.empty(0)     # alpha_i * y_i
        self.bias = 0.0
        self.gamma = 0.0
        self.platt = (0.0, 0.0)
        self.kkt_gap = 0.0
        self.iterations = 0
        self.train_alphas = np.empty(0)

    def _kernel(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        return _kernel_matrix(A, B, self.hyperparams["kernel"], self.gamma)

    def _solve_dual(self, K: np.ndarray, s: np.ndarray):
        """min ½αᵀQα - eᵀα, 0≤α≤C, sᵀα=0"""
        C, tol, max_iter = self.hyperparams["C"], self.hyperparams["tol"], self.hyperparams["max_iter"]
        n = len(s)
        alpha = np.zeros(n)
        grad = -np.ones(n)
        Q = (s[:, None] * s[None, :]) * K

        for iteration in range(max_iter + 1):
            score = -s * grad
            up = ((s > 0) & (alpha < C)) | ((s < 0) & (alpha > 0))
            low = ((s > 0) & (alpha > 0)) | ((s < 0) & (alpha < C))
            i = int(np.flatnonzero(up)[np.argmax(score[up])])
            j = int(np.flatnonzero(low)[np.argmin(score[low])])
            gap = score[i] - score[j]
            if gap < tol:
                return alpha, grad, gap, iteration

            eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
            step = gap / eta
            step = min(step, C - alpha[i] if s[i] > 0 else alpha[i])
            step = min(step, alpha[j] if s[j] > 0 else C - alpha[j])

            new_i = min(max(alpha[i] + s[i] * step, 0.0), C)
            new_j = min(max(alpha[j] - s[j] * step, 0.0), C)
            delta_i, delta_j = new_i - alpha[i], new_j - alpha[j]
            alpha[i], alpha[j] = new_i, new_j
            grad += Q[:, i] * delta_i + Q[:, j] * delta_j

        objective = 0.5 * alpha @ Q @ alpha - alpha.sum()
        raise NoConvergence("SMO未在最大迭代次数内收敛", max_iter, float(objective))

    def _fit(self, Z: np.ndarray, y: np.ndarray):
        gamma = self.hyperparams["gamma"]
        self.gamma = float(gamma) if gamma is not None else 1.0 / Z.shape[1]
        s = np.where(y == 1, 1.0, -1.0)
        K = self._kernel(Z, Z)
        alpha, grad, gap, iterations = self._solve_dual(K, s)

        C = self.hyperparams["C"]
        free = (alpha > 1e-12) & (alpha < C - 1e-12)
        score = -s * grad
        if np.any(free):
            self.bias = float(np.mean(score[free]))
        else:
            up = ((s > 0) & (alpha < C)) | ((s < 0) & (alpha > 0))
            low = ((s > 0) & (alpha > 0)) | ((s < 0) & (alpha < C))
            self.bias = float((np.max(score[up]) + np.min(score[low])) / 2.0)

        support = alpha > 1e-12
        self.support_vectors = Z[support]
        self.dual_coef = alpha[support] * s[support]
        self.train_alphas = alpha
        self.kkt_gap = float(gap)
        self.iterations = iterations
        self.platt = self._fit_platt(self._decision(Z), y)

    def _decision(self, Z: np.ndarray) -> np.ndarray:
        if len(self.dual_coef) == 0:
            return np.full(Z.shape[0], self.bias)
        return self._kernel(Z, self.support_vectors) @ self.dual_coef + self.bias

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        """Σ αᵢyᵢK(xᵢ,x) + b"""
        return self._decision(self._check_input(X))

    @staticmethod
    def _fit_platt(decision: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
        """拟合 P(stress|f) = 1 / (1 + exp(A·f + B))，目标值按先验平滑"""
        n_pos, n_neg = int(np.sum(y == 1)), int(np.sum(y == 0))
        target = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

        start = np.array([0.0, np.log((n_neg + 1.0) / (n_pos + 1.0))])
        result = minimize(platt_objective, start, args=(decision, target), jac=True, method="BFGS")
        return float(result.x[0]), float(result.x[1])

    def _predict_proba(self, Z: np.ndarray) -> np.ndarray:
        a, b = self.platt
        return expit(-(a * self._decision(Z) + b))

    def _get_parameters(self) -> Dict[str, Any]:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "gamma": self.gamma,
            "platt": list(self.platt),
            "kkt_gap": self.kkt_gap,
        }

    def _set_parameters(self, data: Dict[str, Any]):
        self.support_vectors = np.asarray(data["support_vectors"], dtype=float).reshape(-1, self.n_features)
        self.dual_coef = np.asarray(data["dual_coef"], dtype=float)
        self.bias = float(data["bias"])
        self.gamma = float(data["gamma"])
        self.platt = tuple(data["platt"])
        self.kkt_gap = float(data["kkt_gap"])


# ---------------------------------------------------------------- 朴素贝叶斯

class NaiveBayesClassifier(Classifier):
    """高斯朴素贝叶斯，方差有下限避免似然奇异"""

    kind = ClassifierKind.NAIVE_BAYES

    def __init__(self, spec: ClassifierSpec):
        super().__init__(spec)
        self.theta = np.empty((2, 0))    # 行0对照组，行1压力组
        self.var = np.empty((2, 0))
        self.log_prior = np.zeros(2)

    def _fit(self, Z: np.ndarray, y: np.ndarray):
        floor = self.hyperparams["var_floor"]
        self.theta = np.vstack([Z[y == c].mean(axis=0) for c in (0, 1)])
        self.var = np.vstack([np.maximum(Z[y == c].var(axis=0), floor) for c in (0, 1)])
        self.log_prior = np.log(np.array([np.mean(y == 0), np.mean(y == 1)]))

    def _joint_log_likelihood(self, Z: np.ndarray) -> np.ndarray:
        columns = []
        for c in (0, 1):
            log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.var[c]))
            quad = -0.5 * np.sum((Z - self.theta[c]) ** 2 / self.var[c], axis=1)
            columns.append(self.log_prior[c] + log_norm + quad)
        return np.column_stack(columns)

    def _predict_proba(self, Z: np.ndarray) -> np.ndarray:
        joint = self._joint_log_likelihood(Z)
        return np.exp(joint[:, 1] - logsumexp(joint, axis=1))

    def _get_parameters(self) -> Dict[str, Any]:
        return {"theta": self.theta.tolist(), "var": self.var.tolist(), "log_prior": self.log_prior.tolist()}

    def _set_parameters(self, data: Dict[str, Any]):
        self.theta = np.asarray(data["theta"], dtype=float)
        self.var = np.asarray(data["var"], dtype=float)
        self.log_prior = np.asarray(data["log_prior"], dtype=float)


# ---------------------------------------------------------------- KNN

class KnnClassifier(Classifier):
    """K近邻：欧氏距离；距离相同按对照组优先排序，与训练集顺序无关"""

    kind = ClassifierKind.KNN

    def __init__(self, spec: ClassifierSpec):
        super().__init__(spec)
        self.instances = np.empty((0, 0))
        self.instance_labels = np.empty(0, dtype=int)

    def _fit(self, Z: np.ndarray, y: np.ndarray):
        self.instances = Z.copy()
        self.instance_labels = y.copy()

    def _neighbours(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        distances = np.sqrt(np.sum((self.instances - z) ** 2, axis=1))
        order = np.lexsort((self.instance_labels, distances))
        k = min(self.hyperparams["k"], len(order))
        nearest = order[:k]
        return distances[nearest], self.instance_labels[nearest]

    def _predict_proba(self, Z: np.ndarray) -> np.ndarray:
        return np.array([np.mean(self._neighbours(z)[1]) for z in Z])

    def predict_labels(self, X: np.ndarray) -> np.ndarray:
        """票数相同时平均距离更小的一类胜出，再相同则判为对照组"""
        Z = self._check_input(X)
        labels = []
        for z in Z:
            distances, neighbour_labels = self._neighbours(z)
            votes = np.sum(neighbour_labels)
            if votes * 2 != len(neighbour_labels):
                labels.append(int(votes * 2 > len(neighbour_labels)))
                continue
            mean_stress = distances[neighbour_labels == 1].mean()
            mean_control = distances[neighbour_labels == 0].mean()
            labels.append(int(mean_stress < mean_control))
        return np.array(labels, dtype=int)

    def _get_parameters(self) -> Dict[str, Any]:
        return {"instances": self.instances.tolist(), "labels": self.instance_labels.tolist()}

    def _set_parameters(self, data: Dict[str, Any]):
        self.instances = np.asarray(data["instances"], dtype=float).reshape(-1, self.n_features)
        self.instance_labels = np.asarray(data["labels"], dtype=int)


# ---------------------------------------------------------------- 逻辑回归

class LogisticRegressionClassifier(Classifier):
    """L2正则逻辑回归，梯度下降 + 回溯线搜索"""

    kind = ClassifierKind.LOGISTIC_REGRESSION

    ARMIJO_C = 1e-4
    MIN_STEP = 1e-20

    def __init__(self, spec: ClassifierSpec):
        super().__init__(spec)
        self.weights = np.empty(0)
        self.bias = 0.0
        self.objective_history: List[float] = []
        self.iterations = 0

    def objective(self, w: np.ndarray, b: float, Z: np.ndarray, y: np.ndarray) -> float:
        """平均对数损失 + (λ/2)‖w‖²（偏置不惩罚）"""
        z = Z @ w + b
        return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * self.hyperparams["l2"] * (w @ w))

    def gradient(self, w: np.ndarray, b: float, Z: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
        residual = expit(Z @ w + b) - y
        return Z.T @ residual / len(y) + self.hyperparams["l2"] * w, float(np.mean(residual))

    def _fit(self, Z: np.ndarray, y: np.ndarray):
        w, b = np.zeros(Z.shape[1]), 0.0
        current = self.objective(w, b, Z, y)
        self.objective_history = [current]
        step = 1.0
        for iteration in range(self.hyperparams["max_iter"]):
            grad_w, grad_b = self.gradient(w, b, Z, y)
            grad_sq = float(grad_w @ grad_w + grad_b * grad_b)
            if np.sqrt(grad_sq) < self.hyperparams["grad_tol"]:
                break
            step = min(step * 2.0, 1e6)
            while True:
                candidate_w, candidate_b = w - step * grad_w, b - step * grad_b
                candidate = self.objective(candidate_w, candidate_b, Z, y)
                if candidate <= current - self.ARMIJO_C * step * grad_sq or step < self.MIN_STEP:
                    break
                step *= 0.5
            if not np.isfinite(candidate):
                raise NoConvergence("逻辑回归目标函数不是有限值", iteration, candidate)
            if step < self.MIN_STEP:
                break
            w, b, current = candidate_w, candidate_b, candidate
            self.objective_history.append(current)
        else:
            logger.info("逻辑回归达到最大迭代次数 %d，目标值 %.6g", self.hyperparams["max_iter"], current)
        self.weights, self.bias = w, b
        self.iterations = len(self.objective_history) - 1

    def _predict_proba(self, Z: np.ndarray) -> np.ndarray:
        return expit(Z @ self.weights + self.bias)

    def _get_parameters(self) -> Dict[str, Any]:
        return {"weights": self.weights.tolist(), "bias": self.bias}

    def _set_parameters(self, data: Dict[str, Any]):
        self.weights = np.asarray(data["weights"], dtype=float)
        self.bias = float(data["bias"])


# ---------------------------------------------------------------- 多层感知机

def mlp_forward(params: Dict[str, np.ndarray], Z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """返回 (隐藏层激活, 输出)"""
    hidden = expit(Z @ params["W1"].T + params["b1"])
    output = expit(hidden @ params["w2"] + params["b2"])
    return hidden, output


def mlp_mean_loss(params: Dict[str, np.ndarray], Z: np.ndarray, y: np.ndarray) -> float:
    """全部样本平方误差的均值"""
    _, output = mlp_forward(params, Z)
    return float(np.mean(mlp_loss(y, output)))


def mlp_gradients(params: Dict[str, np.ndarray], Z: np.ndarray, y: np.ndarray) -> Dict[str, np.ndarray]:
    """反向传播求平均损失对每个权重的梯度"""
    hidden, output = mlp_forward(params, Z)
    d_output = (output - y) * output * (1.0 - output) / len(y)
    d_hidden = np.outer(d_output, params["w2"]) * hidden * (1.0 - hidden)
    return {
        "W1": d_hidden.T @ Z,
        "b1": d_hidden.sum(axis=0),
        "w2": hidden.T @ d_output,
        "b2": np.array(d_output.sum()),
    }


def mlp_init(n_inputs: int, hidden_units: int, init_range: float, seed: int) -> Dict[str, np.ndarray]:
    """权重在 ±init_range 内均匀初始化"""
    rng = np.random.default_rng(seed)
    return {
        "W1": rng.uniform(-init_range, init_range, size=(hidden_units, n_inputs)),
        "b1": rng.uniform(-init_range, init_range, size=hidden_units),
        "w2": rng.uniform(-init_range, init_range, size=hidden_units),
        "b2": np.array(rng.uniform(-init_range, init_range)),
    }


class MlpClassifier(Classifier):
    """单隐藏层sigmoid网络，平方误差，全批量反向传播"""

    kind = ClassifierKind.MLP

    def __init__(self, spec: ClassifierSpec):
        super().__init__(spec)
        self.params: Dict[str, np.ndarray] = {}
        self.loss_history: List[float] = []

    def _fit(self, Z: np.ndarray, y: np.ndarray):
        hp = self.hyperparams
        params = mlp_init(Z.shape[1], hp["hidden_units"], hp["init_range"], self.spec.seed)
        target = y.astype(float)
        for _ in range(hp["epochs"]):
            grads = mlp_gradients(params, Z, target)
            for name in params:
                params[name] = params[name] - hp["learning_rate"] * grads[name]
        final = mlp_mean_loss(params, Z, target)
        if not np.isfinite(final):
            raise NoConvergence("MLP损失不是有限值", hp["epochs"], final)
        self.loss_history.append(final)
        self.params = params

    def _predict_proba(self, Z: np.ndarray) -> np.ndarray:
        return mlp_forward(self.params, Z)[1]

    def _get_parameters(self) -> Dict[str, Any]:
        return {name: np.asarray(value).tolist() for name, value in self.params.items()}

    def _set_parameters(self, data: Dict[str, Any]):
        self.params = {name: np.asarray(value, dtype=float) for name, value in data.items()}


class ClassifierFactory:
    """分类器工厂"""

    _registry = {
        ClassifierKind.SVM: SvmClassifier,
        ClassifierKind.NAIVE_BAYES: NaiveBayesClassifier,
        ClassifierKind.KNN: KnnClassifier,
        ClassifierKind.LOGISTIC_REGRESSION: LogisticRegressionClassifier,
        ClassifierKind.MLP: MlpClassifier,
    }

    @staticmethod
    def create(spec: ClassifierSpec) -> Classifier:
        """按配置创建未训练的分类器"""
        return ClassifierFactory._registry[spec.kind](spec)

    @staticmethod
    def create_specs(kinds: List[str], seed: int = 0,
                     overrides: Optional[Dict[str, Dict[str, Any]]] = None) -> List[ClassifierSpec]:
        """为多个分类器创建配置"""
        overrides = overrides or {}
        return [ClassifierSpec(ClassifierKind(kind), dict(overrides.get(kind, {})), seed) for kind in kinds]


def train(spec: ClassifierSpec, X: np.ndarray, y: np.ndarray,
          feature_names: Optional[List[str]] = None) -> Classifier:
    """训练一个分类器"""
    return ClassifierFactory.create(spec).fit(X, y, feature_names)


def predict(model: Classifier, x: np.ndarray) -> Tuple[Label, float]:
    """单样本预测"""
    return model.predict(x)


def model_from_dict(data: Dict[str, Any]) -> Classifier:
    """从模型文档还原已训练的分类器"""
    if data.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"不支持的模型格式版本: {data.get('format_version')}")
    spec = ClassifierSpec(ClassifierKind(data["kind"]), dict(data["hyperparams"]), int(data["seed"]))
    model = ClassifierFactory.create(spec)
    model.feature_names = list(data["feature_names"])
    model.class_prior = dict(data["class_prior"])
    model.scaler = FeatureScaler.from_dict(data["scaler"])
    model._set_parameters(data["parameters"])
    return model


def save_model(model: Classifier, path: str):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(), f, indent=2)
        f.write("\n")


def load_model(path: str) -> Classifier:
    with open(path, "r", encoding="utf-8") as f:
        return model_from_dict(json.load(f))
