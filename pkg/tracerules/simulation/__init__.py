from .truth import *
from .catalog import *
from .workload import *
from .faults import *
