# __init__.py

from .presets import *
from .sweep import *
from .tradeoff import *
from .regress import *
