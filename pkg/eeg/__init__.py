"""
EEG信号处理包
记录读取、基线校正、功率谱、特征提取和合成数据
"""
