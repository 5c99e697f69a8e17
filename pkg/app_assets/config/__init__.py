""" Paths to bundled run configurations.
"""

###########
# Imports #
###########
# System imports
from pathlib import Path

#############
# Constants #
#############
CONFIG_DIRECTORY = Path(__file__).parent

################
# Config Files #
################
# Full parameter set of the reference design
REFERENCE_DESIGN_JSON = CONFIG_DIRECTORY / 'reference_design.json'
