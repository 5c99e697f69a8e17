""" Main menu class: the command-line surface. """

###########
# Imports #
###########
# Standard library
import argparse

# Custom modules
from app_assets import README


#############
# Constants #
#############
COMMANDS = {
    'bands': "Dispersion of waveguides A, B and C",
    'gaps': "Band gaps of waveguides A, B and C, edges refined",
    'regions': "Region I-IV classification of the three gap sets",
    'sweep': "Gap robustness over one waveguide parameter",
    'resonator': "Free resonator mode catalog",
    'waveguide-modes': "Standing-wave modes of a finite waveguide",
    'tune': "Waveguide length for a target standing-wave frequency",
    'couple': "Resonator-waveguide-resonator triplet and coupling",
    'patch': "Energy confinement of one network edge with stubs",
    'audit': "Closed mechanical subsystem audit",
    'shield': "Shield dispersion and operating-frequency coverage",
    'plot': "Render an artifact to SVG",
}
PLOT_KINDS = ('band-diagram', 'gap-sweep', 'mode-field', 'layout')


############
# MainMenu #
############
class MainMenu(argparse.ArgumentParser):
    """ Main Menu. """
    def __init__(self, _app_info, **kwargs):
        super().__init__(
            prog=_app_info['name'].lower(),
            description="Design and audit of honeycomb phononic networks.",
            epilog=f"Documentation: {README.README_MD}",
            **kwargs
        )

        # Assign variables
        self._app_info = _app_info

        self.add_argument(
            '--version', action='version',
            version=f"%(prog)s {_app_info['version']}"
        )
        subparsers = self.add_subparsers(dest='command', metavar='command',
                                           parser_class=argparse.ArgumentParser)
        subparsers.required = True

        for name, text in COMMANDS.items():
            sub = subparsers.add_parser(name, help=text, description=text)
            if name == 'plot':
                sub.add_argument('artifact', help="Artifact file to render")
                sub.add_argument('--kind', required=True, choices=PLOT_KINDS)
                sub.add_argument('--mesh', default=None,
                                 help="Mesh file for mode-field plots "
                                      "(default: mesh.txt next to the mode)")
                sub.add_argument('--out', default=None,
                                 help="SVG path (default: next to artifact)")
                continue
            self._add_run_options(sub)


    @staticmethod
    def _add_run_options(sub):
        """ Options shared by every solver command. """
        sub.add_argument('--config', default=None,
                         help="JSON run configuration (default: the "
                              "bundled reference design)")
        sub.add_argument('--out', default=None,
                         help="Parent directory for the run directory")
        sub.add_argument('--threads', type=int, default=None,
                         help="Worker threads (also HONEYNET_THREADS)")
        sub.add_argument('--override', action='append', default=[],
                         metavar='BLOCK.KEY=VALUE',
                         help="Override one config value (repeatable)")
        sub.add_argument('--plot', action='store_true',
                         help="Also render SVG plots")
