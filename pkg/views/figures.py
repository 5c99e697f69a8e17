""" Shared matplotlib settings for SVG output.

    Figures are rendered off-screen with the Agg backend. The SVG hash
    salt is fixed and the date metadata dropped so the same inputs give
    byte-identical files.
"""

###########
# Imports #
###########
# Data Science
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
from matplotlib import rcParams
rcParams.update({
    'figure.autolayout': True,
    'svg.hashsalt': 'honeynet',
    'svg.fonttype': 'path',
    'path.simplify': False,
})


#############
# Constants #
#############
FIGSIZE = (6.0, 4.5)
GAP_COLOR = '#9ecae1'
REGION_STYLE = {'color': 'k', 'linestyle': 'dashed', 'linewidth': 0.8}


#############
# Functions #
#############
def new_figure(figsize=FIGSIZE):
    return plt.subplots(figsize=figsize)


def save_svg(fig, path):
    """ Write fig to path as SVG and close it. """
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    print(f"figures: Saved {path}")
    return path
