"""
流水线异常模块
定义所有阶段共用的异常类型，按退出码分为校验错误和数值错误两类
"""

from typing import Optional


class PipelineError(ValueError):
    """流水线异常基类"""

    exit_code = 1

    def __init__(self, message: str, subject_id: Optional[str] = None, **context):
        self.subject_id = subject_id
        self.context = context
        details = []
        if subject_id is not None:
            details.append(f"subject={subject_id}")
        details.extend(f"{key}={value}" for key, value in context.items())
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)


class ValidationError(PipelineError):
    """输入校验错误，退出码2"""

    exit_code = 2


class NumericalError(PipelineError):
    """数值计算错误，退出码3"""

    exit_code = 3


# 数据读取
class MissingChannel(ValidationError):
    pass


class NonFiniteSample(ValidationError):
    pass


class RaggedChannels(ValidationError):
    pass


class BadSampleRate(ValidationError):
    pass


class TooShortRecording(ValidationError):
    pass


class DuplicateSubject(ValidationError):
    pass


class PssOutOfRange(ValidationError):
    pass


class PssWrongArity(ValidationError):
    pass


class UnknownLabel(ValidationError):
    pass


# 频谱与特征
class TooShort(ValidationError):
    pass


class BadOverlap(ValidationError):
    pass


class BandOutOfRange(ValidationError):
    pass


class DivisionByZero(NumericalError):
    pass


class DegenerateDenominator(NumericalError):
    pass


# 标注与特征选择
class InsufficientCohort(ValidationError):
    pass


class InsufficientGroup(ValidationError):
    pass


class EmptyClass(ValidationError):
    pass


# 分类器
class InvalidHyperparameter(ValidationError):
    pass


class SingleClassTraining(ValidationError):
    pass


class NonFiniteFeature(ValidationError):
    pass


class ArityMismatch(ValidationError):
    pass


class NoConvergence(NumericalError):
    """优化未收敛，附带迭代次数和最终目标值"""

    def __init__(self, message: str, iterations: int, objective: float, **context):
        self.iterations = iterations
        self.objective = objective
        super().__init__(message, iterations=iterations, objective=objective, **context)


# 评估
class LengthMismatch(ValidationError):
    pass


class TooFewSubjects(ValidationError):
    pass


class TooFewPerClass(ValidationError):
    pass


# 合成数据
class InvalidSpec(ValidationError):
    pass


class StageError(PipelineError):
    """流水线阶段失败，保留原始异常的退出码"""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"阶段 {stage} 失败: {cause}", stage=stage)
