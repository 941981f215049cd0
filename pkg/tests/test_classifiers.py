"""
分类器测试
"""

import unittest
import sys
import os
import tempfile

import numpy as np
from scipy.optimize import check_grad

# 添加项目根目录到路径
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from eeg.recording import Label
from eeg.errors import InvalidHyperparameter, SingleClassTraining, NonFiniteFeature, ArityMismatch
from analysis.classifiers import (
    ClassifierKind, ClassifierSpec, ClassifierFactory, SvmClassifier, KnnClassifier,
    LogisticRegressionClassifier, knn_distance, mlp_loss, mlp_init, mlp_mean_loss, mlp_gradients,
    train, predict, save_model, load_model, model_from_dict, platt_objective,
)


def blobs(n_per_class=20, shift=3.0, dims=2, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0.0, 1.0, (n_per_class, dims)), rng.normal(shift, 1.0, (n_per_class, dims))])
    y = np.array([0] * n_per_class + [1] * n_per_class)
    return X, y


def spec(kind, seed=0, **params):
    return ClassifierSpec(ClassifierKind(kind), params, seed)


class TestSvm(unittest.TestCase):
    """测试SVM"""

    def test_decision_matches_kernel_expansion(self):
        """测试决策值与核展开逐项求和一致"""
        X, y = blobs(shift=1.5, seed=1)
        for kernel in ("linear", "rbf"):
            model = train(spec("svm", kernel=kernel), X, y)
            Z = (X - model.scaler.mean) / model.scaler.scale
            for x, z in zip(X[:10], Z[:10]):
                expected = model.bias
                for coef, sv in zip(model.dual_coef, model.support_vectors):
                    if kernel == "linear":
                        k = float(np.dot(sv, z))
                    else:
                        k = float(np.exp(-model.gamma * np.sum((sv - z) ** 2)))
                    expected += coef * k
                self.assertAlmostEqual(model.decision_function(x[None, :])[0], expected, delta=1e-8)

    def test_kkt_conditions(self):
        """测试对偶解满足KKT条件"""
        X, y = blobs(shift=1.0, seed=2)
        model = train(spec("svm", C=1.0), X, y)
        C = model.hyperparams["C"]
        alphas = model.train_alphas
        self.assertLessEqual(model.kkt_gap, 1e-3)
        self.assertTrue(np.all(alphas >= 0) and np.all(alphas <= C))
        s = np.where(y == 1, 1.0, -1.0)
        self.assertAlmostEqual(float(np.dot(alphas, s)), 0.0, delta=1e-9)
        margins = s * model.decision_function(X)
        tol = 1e-2
        for alpha, margin in zip(alphas, margins):
            if alpha <= 1e-12:
                self.assertGreaterEqual(margin, 1 - tol)
            elif alpha >= C - 1e-12:
                self.assertLessEqual(margin, 1 + tol)
            else:
                self.assertAlmostEqual(margin, 1.0, delta=tol)

    def test_separable_and_probability(self):
        """测试可分数据全部分对，概率随决策值单调"""
        X, y = blobs(shift=6.0, seed=3)
        model = train(spec("svm"), X, y)
        self.assertTrue(np.array_equal(model.predict_labels(X), y))
        order = np.argsort(model.decision_function(X))
        probs = model.predict_proba(X)[order]
        self.assertTrue(np.all(np.diff(probs) >= -1e-12))
        self.assertTrue(np.all((probs >= 0) & (probs <= 1)))
        p_stress = model.predict_proba(X)
        self.assertTrue(np.all(p_stress[y == 1] > 0.5))
        self.assertTrue(np.all(p_stress[y == 0] < 0.5))

    def test_platt_gradient(self):
        """测试Platt目标函数的解析梯度与数值梯度一致"""
        rng = np.random.default_rng(8)
        decision = rng.normal(0.0, 2.0, 30)
        y = (decision + rng.normal(0.0, 1.0, 30) > 0).astype(int)
        target = np.where(y == 1, 0.9, 0.1)
        value = lambda params: platt_objective(params, decision, target)[0]
        gradient = lambda params: platt_objective(params, decision, target)[1]
        for params in ([0.0, 0.0], [-1.3, 0.2], [0.7, -0.5]):
            self.assertLess(check_grad(value, gradient, np.array(params)), 1e-4)

    def test_platt_moves_from_start(self):
        """测试Platt缩放确实拟合出斜率，决策值越大压力概率越高"""
        X, y = blobs(shift=2.0, seed=5)
        model = train(spec("svm"), X, y)
        a, _ = model.platt
        self.assertLess(a, 0.0)
        self.assertGreater(np.ptp(model.predict_proba(X)), 0.5)


class TestNaiveBayes(unittest.TestCase):
    """测试朴素贝叶斯"""

    def test_parameter_recovery(self):
        """测试恢复生成高斯分布的参数（3个标准误内）"""
        rng = np.random.default_rng(4)
        n = 2000
        means = {0: np.array([1.0, -2.0]), 1: np.array([3.0, 0.5])}
        sds = {0: np.array([1.0, 0.5]), 1: np.array([2.0, 1.5])}
        X = np.vstack([rng.normal(means[c], sds[c], (n, 2)) for c in (0, 1)])
        y = np.array([0] * n + [1] * n)
        model = train(spec("naive_bayes"), X, y)
        for c in (0, 1):
            mean = model.theta[c] * model.scaler.scale + model.scaler.mean
            var = model.var[c] * model.scaler.scale ** 2
            se_mean = sds[c] / np.sqrt(n)
            se_var = sds[c] ** 2 * np.sqrt(2.0 / (n - 1))
            self.assertTrue(np.all(np.abs(mean - means[c]) < 3 * se_mean))
            self.assertTrue(np.all(np.abs(var - sds[c] ** 2) < 3 * se_var))
        self.assertAlmostEqual(float(np.exp(model.log_prior[1])), 0.5)

    def test_constant_feature(self):
        """测试常数特征不会导致除零"""
        X, y = blobs(seed=5)
        X[:, 1] = 7.0
        probs = train(spec("naive_bayes"), X, y).predict_proba(X)
        self.assertTrue(np.all(np.isfinite(probs)))


class TestKnn(unittest.TestCase):
    """测试K近邻"""

    def test_distance_matches_loop(self):
        """测试距离与朴素循环一致"""
        rng = np.random.default_rng(6)
        for _ in range(100):
            a, b = rng.normal(size=7), rng.normal(size=7)
            total = 0.0
            for i in range(7):
                total += (a[i] - b[i]) ** 2
            self.assertAlmostEqual(knn_distance(a, b), total ** 0.5, delta=1e-12)
        with self.assertRaises(ArityMismatch):
            knn_distance(np.zeros(2), np.zeros(3))

    def test_k_larger_than_training(self):
        """测试k大于训练样本数时使用全部样本"""
        X = np.array([[0.0], [0.1], [5.0], [5.1]])
        y = np.array([0, 0, 1, 1])
        model = train(spec("knn", k=7), X, y)
        self.assertTrue(np.allclose(model.predict_proba(X), 0.5))

    def test_tie_rules(self):
        """测试平票时平均距离更近的一类胜出"""
        # k大于样本数时实际近邻数为4，两类各2票
        X = np.array([[0.0], [1.0], [3.0], [4.0]])
        y = np.array([0, 0, 1, 1])
        model = train(spec("knn", k=5), X, y)
        self.assertAlmostEqual(model.predict_proba(np.array([[2.2]]))[0], 0.5)
        self.assertEqual(model.predict_labels(np.array([[2.2]]))[0], 1)
        self.assertEqual(model.predict_labels(np.array([[1.8]]))[0], 0)

    def test_training_order_invariant(self):
        """测试预测与训练集顺序无关"""
        X, y = blobs(shift=1.0, seed=7)
        perm = np.random.default_rng(0).permutation(len(y))
        a = train(spec("knn", k=5), X, y)
        b = train(spec("knn", k=5), X[perm], y[perm])
        queries = np.random.default_rng(1).normal(0.5, 1.0, (30, 2))
        np.testing.assert_array_equal(a.predict_labels(queries), b.predict_labels(queries))

    def test_k1_returns_training_label(self):
        """测试k=1时训练点的预测就是它自己的标签"""
        X, y = blobs(shift=0.5, seed=16)
        model = train(spec("knn", k=1), X, y)
        np.testing.assert_array_equal(model.predict_labels(X), y)
        np.testing.assert_array_equal(model.predict_proba(X), y.astype(float))

    def test_even_k_rejected(self):
        """测试k必须是正奇数"""
        with self.assertRaises(InvalidHyperparameter):
            ClassifierFactory.create(spec("knn", k=4))
        with self.assertRaises(InvalidHyperparameter):
            ClassifierFactory.create(spec("knn", k=0))


class TestLogisticRegression(unittest.TestCase):
    """测试逻辑回归"""

    def test_objective_monotone(self):
        """测试目标函数单调不增"""
        X, y = blobs(shift=1.5, seed=8)
        model = train(spec("logistic_regression"), X, y)
        history = np.array(model.objective_history)
        self.assertTrue(np.all(np.diff(history) <= 1e-12))
        self.assertGreater(model.iterations, 0)

    def test_gradient_matches_finite_differences(self):
        """测试解析梯度与中心差分一致"""
        X, y = blobs(seed=9)
        model = LogisticRegressionClassifier(spec("logistic_regression", l2=0.1))
        Z = (X - X.mean(axis=0)) / X.std(axis=0)
        w, b = np.array([0.3, -0.2]), 0.1
        grad_w, grad_b = model.gradient(w, b, Z, y)
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            numeric = (model.objective(w + e, b, Z, y) - model.objective(w - e, b, Z, y)) / (2 * h)
            self.assertAlmostEqual(grad_w[i], numeric, delta=1e-7)
        numeric_b = (model.objective(w, b + h, Z, y) - model.objective(w, b - h, Z, y)) / (2 * h)
        self.assertAlmostEqual(grad_b, numeric_b, delta=1e-7)

    def test_xor_not_linearly_separable(self):
        """测试线性模型在XOR上训练准确率不超过75%"""
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]] * 5)
        y = np.array([0, 1, 1, 0] * 5)
        model = train(spec("logistic_regression"), X, y)
        self.assertLessEqual(np.mean(model.predict_labels(X) == y), 0.75)

    def test_zero_weights_give_half(self):
        """测试权重和偏置全为0时压力组概率为0.5"""
        X, y = blobs(seed=17)
        data = train(spec("logistic_regression"), X, y).to_dict()
        data["parameters"] = {"weights": [0.0, 0.0], "bias": 0.0}
        model = model_from_dict(data)
        np.testing.assert_array_equal(model.predict_proba(X), np.full(len(y), 0.5))
        np.testing.assert_array_equal(model.predict_labels(X), np.zeros(len(y), dtype=int))

    def test_max_iter_is_not_an_error(self):
        """测试达到最大迭代次数时仍返回模型"""
        X, y = blobs(shift=1.0, seed=10)
        with self.assertLogs("analysis.classifiers", level="INFO"):
            model = train(spec("logistic_regression", max_iter=3, grad_tol=1e-30), X, y)
        self.assertEqual(model.iterations, 3)


class TestMlp(unittest.TestCase):
    """测试多层感知机"""

    def test_loss(self):
        """测试平方误差"""
        self.assertEqual(mlp_loss(1.0, 0.5), 0.125)
        self.assertEqual(mlp_loss(0.0, 0.0), 0.0)

    def test_gradients_match_finite_differences(self):
        """测试反向传播梯度与中心差分一致"""
        rng = np.random.default_rng(12)
        Z = rng.normal(size=(15, 3))
        y = (rng.uniform(size=15) > 0.5).astype(float)
        params = mlp_init(3, 4, 0.5, seed=3)
        grads = mlp_gradients(params, Z, y)
        h = 1e-5
        for name, value in params.items():
            numeric = np.zeros_like(value, dtype=float)
            for index in np.ndindex(value.shape):
                plus = {key: np.array(val, dtype=float, copy=True) for key, val in params.items()}
                minus = {key: np.array(val, dtype=float, copy=True) for key, val in params.items()}
                plus[name][index] += h
                minus[name][index] -= h
                numeric[index] = (mlp_mean_loss(plus, Z, y) - mlp_mean_loss(minus, Z, y)) / (2 * h)
            analytic = np.asarray(grads[name], dtype=float)
            denominator = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), 1e-12)
            self.assertLess(np.linalg.norm(analytic - numeric) / denominator, 1e-6, name)

    def test_xor(self):
        """测试能学会XOR（至少一个种子达到100%）"""
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        solved = False
        for seed in range(10):
            model = train(spec("mlp", seed=seed, hidden_units=4, learning_rate=2.0, epochs=20000,
                               init_range=1.0), X, y)
            if np.array_equal(model.predict_labels(X), y):
                solved = True
                break
        self.assertTrue(solved)

    def test_seed_determinism(self):
        """测试相同种子训练结果相同"""
        X, y = blobs(seed=13)
        a = train(spec("mlp", seed=5, epochs=200), X, y)
        b = train(spec("mlp", seed=5, epochs=200), X, y)
        np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))


class TestClassifierContract(unittest.TestCase):
    """测试所有分类器共同的约定"""

    KINDS = ["svm", "naive_bayes", "knn", "logistic_regression", "mlp"]

    def test_single_class_training(self):
        """测试每类少于2个样本"""
        X, y = blobs(n_per_class=5)
        y_one = y.copy()
        y_one[:] = 1
        y_one[0] = 0
        for kind in self.KINDS:
            with self.assertRaises(SingleClassTraining):
                train(spec(kind), X, y_one)

    def test_non_finite_features(self):
        """测试训练特征含NaN"""
        X, y = blobs(n_per_class=5)
        X[2, 0] = np.nan
        for kind in self.KINDS:
            with self.assertRaises(NonFiniteFeature):
                train(spec(kind), X, y)

    def test_arity_mismatch(self):
        """测试预测时特征维数不一致"""
        X, y = blobs(n_per_class=5)
        for kind in self.KINDS:
            model = train(spec(kind), X, y)
            with self.assertRaises(ArityMismatch):
                model.predict_proba(np.zeros((1, 3)))

    def test_probabilities_and_labels(self):
        """测试概率在[0,1]，标签与0.5阈值一致"""
        X, y = blobs(shift=2.0, seed=14)
        for kind in self.KINDS:
            model = train(spec(kind), X, y)
            probs = model.predict_proba(X)
            self.assertTrue(np.all((probs >= 0) & (probs <= 1)), kind)
            if kind != "knn":
                np.testing.assert_array_equal(model.predict_labels(X), (probs > 0.5).astype(int))
            label, p = predict(model, X[0])
            self.assertIsInstance(label, Label)
            self.assertAlmostEqual(p, probs[0])

    def test_label_flip_symmetry(self):
        """测试标签互换后概率变为1-p，预测标签互换"""
        X, y = blobs(shift=2.0, seed=18)
        queries = np.random.default_rng(2).normal(1.0, 1.5, (40, 2))
        for kind, params in (("svm", {}), ("svm", {"kernel": "linear"}), ("naive_bayes", {}),
                             ("knn", {"k": 5}), ("logistic_regression", {})):
            p = train(spec(kind, **params), X, y).predict_proba(queries)
            flipped = train(spec(kind, **params), X, 1 - y).predict_proba(queries)
            np.testing.assert_allclose(flipped, 1.0 - p, atol=1e-4, err_msg=kind)
            decided = np.abs(p - 0.5) > 1e-3
            self.assertTrue(np.array_equal((flipped > 0.5)[decided], (p <= 0.5)[decided]), kind)

    def test_persistence(self):
        """测试模型保存后读回的预测完全相同"""
        X, y = blobs(shift=2.0, seed=15)
        with tempfile.TemporaryDirectory() as tmp:
            for kind in self.KINDS:
                model = train(spec(kind, seed=3), X, y, ["f1", "f2"])
                path = os.path.join(tmp, f"{kind}.json")
                save_model(model, path)
                restored = load_model(path)
                self.assertEqual(restored.feature_names, ["f1", "f2"])
                np.testing.assert_array_equal(restored.predict_proba(X), model.predict_proba(X))
                np.testing.assert_array_equal(restored.predict_labels(X), model.predict_labels(X))
        with self.assertRaises(ValueError):
            model_from_dict({"format_version": 99})

    def test_invalid_hyperparameters(self):
        """测试超参数校验"""
        with self.assertRaises(InvalidHyperparameter):
            ClassifierFactory.create(spec("svm", C=0.0))
        with self.assertRaises(InvalidHyperparameter):
            ClassifierFactory.create(spec("svm", kernel="poly"))
        with self.assertRaises(InvalidHyperparameter):
            ClassifierFactory.create(spec("mlp", hidden_units=0))
        with self.assertRaises(InvalidHyperparameter):
            ClassifierFactory.create(spec("logistic_regression", momentum=0.9))
        self.assertIsInstance(ClassifierFactory.create(spec("svm")), SvmClassifier)
        self.assertIsInstance(ClassifierFactory.create(spec("knn")), KnnClassifier)


if __name__ == '__main__':
    unittest.main()
