from mpclib.congest.program import *
from mpclib.congest.engine import *
