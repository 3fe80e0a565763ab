from mpclib.harness.records import *
from mpclib.harness.commands import *
from mpclib.harness.bench import *
