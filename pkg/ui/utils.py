"""
UI工具函数模块
提供控制台输出、日志着色和表格显示相关的工具函数
"""

import logging
from typing import List, Any, Optional

from colorama import init, Fore, Style
from tabulate import tabulate

from config import UI_CONFIG

# 初始化colorama
init(autoreset=True)


class Colors:
    """颜色常量"""
    RED = Fore.RED
    GREEN = Fore.GREEN
    YELLOW = Fore.YELLOW
    BLUE = Fore.BLUE
    MAGENTA = Fore.MAGENTA
    CYAN = Fore.CYAN
    WHITE = Fore.WHITE
    BRIGHT = Style.BRIGHT
    RESET = Style.RESET_ALL


def set_colors_enabled(enabled: bool):
    """开关彩色输出（--no-color）"""
    UI_CONFIG["enable_colors"] = enabled


def colorize(text: str, color: str) -> str:
    if not UI_CONFIG["enable_colors"]:
        return text
    return f"{color}{text}{Colors.RESET}"


def print_title(title: str):
    """打印标题"""
    border = "=" * (len(title) + 4)
    print(colorize(f"\n{border}\n  {title}\n{border}\n", Colors.CYAN))


def print_error(message: str):
    """打印错误信息"""
    print(colorize(f"[错误] {message}", Colors.RED))


def print_success(message: str):
    """打印成功信息"""
    print(colorize(f"[成功] {message}", Colors.GREEN))


def print_warning(message: str):
    """打印警告信息"""
    print(colorize(f"[警告] {message}", Colors.YELLOW))


def print_info(message: str):
    """打印信息"""
    print(colorize(f"[信息] {message}", Colors.BLUE))


def print_debug(message: str):
    print(colorize(f"[调试] {message}", Colors.MAGENTA))


class ColorLogHandler(logging.Handler):
    """把日志记录转到 print_* 系列函数"""

    def emit(self, record: logging.LogRecord):
        try:
            message = self.format(record)
            if record.levelno >= logging.ERROR:
                print_error(message)
            elif record.levelno >= logging.WARNING:
                print_warning(message)
            elif record.levelno >= logging.INFO:
                print_info(message)
            else:
                print_debug(message)
        except Exception:
            self.handleError(record)


def setup_logging(verbose: bool = False, colors: Optional[bool] = None):
    """给根日志器安装彩色处理器"""
    if colors is not None:
        set_colors_enabled(colors)
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, ColorLogHandler):
            root.removeHandler(handler)
    handler = ColorLogHandler()
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose or UI_CONFIG["show_debug_info"] else logging.INFO)


def format_number(value: Any, digits: int = 4) -> str:
    """表格中的数值格式"""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return str(value)
    if isinstance(value, int):
        return str(value)
    return f"{value:.{digits}g}"


def create_table(headers: List[str], rows: List[List[Any]], title: str = None) -> str:
    """创建表格"""
    table = tabulate([[format_number(cell) for cell in row] for row in rows], headers=headers, tablefmt="grid")
    if title:
        return f"\n{colorize(title, Colors.CYAN)}\n{table}\n"
    return f"\n{table}\n"


def print_frame(frame, title: str = None, columns: Optional[List[str]] = None):
    """以表格形式打印pandas表"""
    if columns:
        frame = frame[columns]
    print(create_table(list(frame.columns), frame.values.tolist(), title))


def print_ttest_table(frame):
    """t检验结果表，入选特征高亮"""
    rows = []
    for record in frame.to_dict("records"):
        row = [format_number(record[key]) for key in frame.columns]
        if record.get("selected"):
            row = [colorize(cell, Colors.GREEN) for cell in row]
        rows.append(row)
    print(create_table(list(frame.columns), rows, "t检验结果"))


def print_artifacts(out_dir: str, names: List[str]):
    """列出写出的产物文件"""
    print_success(f"产物目录: {out_dir}")
    for name in names:
        print(f"  - {name}")
