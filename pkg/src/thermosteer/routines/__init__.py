# __init__.py

# Import core functionality
from .definitions import *
from .linalg import *
from .machine import *
from .nonclassicality import *
from .steering import *
from .filtering import *
from .prjbuild import *
