# -*- encoding: UTF-8 -*-
import os
import threading

import yaml

config = None
_lock = threading.Lock()


def init(config_file=None):
    global config
    root_dir = os.path.dirname(os.path.abspath(__file__))  # 项目根目录
    config_file = config_file or os.environ.get('DQP_CONFIG') or os.path.join(root_dir, 'config.yaml')
    with open(config_file, 'r', encoding='utf-8') as file:
        config = yaml.safe_load(file) or {}
    return config


def get_config():
    if config is None:
        with _lock:
            if config is None:
                init()
    return config


def get_option(section, key, default=None):
    """读取 config.yaml 中某一段的键，缺失时返回 default"""
    return get_config().get(section, {}).get(key, default)
