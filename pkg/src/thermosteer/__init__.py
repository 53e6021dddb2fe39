from .routines import *
from .simulations import *
