"""
统计与分类包
受试者标注、特征选择、分类器、交叉验证和报告
"""
