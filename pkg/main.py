# -*- encoding: UTF-8 -*-

import sys

import settings
from dqp_framework.cli import main

if __name__ == '__main__':
    settings.init()
    sys.exit(main())
