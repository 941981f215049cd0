"""
长期压力EEG分类程序主入口
从EEG记录和PSS问卷到十折交叉验证评估的完整流水线
"""

import sys
import os

# 添加当前目录到Python路径
sys.path.append(os.path.dirname(os.path.abspath(__file__)))


def main() -> int:
    """主程序入口"""
    try:
        # 检查依赖
        try:
            import colorama
            import tabulate
            import numpy
            import scipy
            import pandas
        except ImportError as e:
            print("缺少依赖包，请运行: pip install -r requirements.txt")
            print(f"错误详情: {e}")
            return 1

        from ui.cli import main as cli_main
        return cli_main()

    except KeyboardInterrupt:
        print("\n\n运行被用户中断")
        return 130
    except Exception as e:
        print(f"\n程序发生致命错误: {e}")
        print("请使用 --verbose 查看详细信息")
        return 1


if __name__ == "__main__":
    sys.exit(main())
