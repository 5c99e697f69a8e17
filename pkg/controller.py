""" HoneyNet

    Design and audit toolkit for honeycomb networks of phononic
    waveguides and triangular resonators on a thin diamond membrane.

    Each command reads a JSON run configuration (the bundled reference
    defaults unless --config is given), runs one design stage and writes
    CSV/JSON artifacts, optional SVG plots and a manifest into a
    timestamped run directory.

    Exit status: 0 success, 2 configuration or validation error,
    3 solver failure, 4 audit verdict failure.
"""

###########
# Imports #
###########
# Standard library
import json
import math
import sys
from pathlib import Path

# Third party
import pandas as pd

# Custom modules
# Menus
from menus import mainmenu
# Exceptions
from exceptions.config_exceptions import ArtifactMismatch
from exceptions.config_exceptions import ConfigError
from exceptions.device_exceptions import SingleModeApproximationError
from exceptions.device_exceptions import TripletError
from exceptions.device_exceptions import TuningError
from exceptions.geometry_exceptions import GeometryError
from exceptions.mesh_exceptions import MeshError
from exceptions.network_exceptions import LayoutError
from exceptions.network_exceptions import NetworkSpecError
from exceptions.solver_exceptions import SingularMaterial
from exceptions.solver_exceptions import SolverError
# Models
from models import artifactmodel
from models import bandsmodel
from models import configmodel
from models import devicemodel
from models import elasticitymodel
from models import geometrymodel
from models import meshmodel
from models import networkmodel
# Views
from views import bandview
from views import fieldview
from views import layoutview
# Functions
from functions import general


#############
# Constants #
#############
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERDICT = 4

# SingularMaterial is a SolverError but is a validation failure
VALIDATION_ERRORS = (ConfigError, ArtifactMismatch, GeometryError,
                     SingularMaterial, NetworkSpecError, ValueError,
                     OSError)
SOLVER_ERRORS = (MeshError, SolverError, TuningError, TripletError,
                 SingleModeApproximationError, LayoutError)
SWEEP_PARAMS = {'d': 'd_um', 'w': 'w_um', 'a': 'a_um', 'b': 'b_um'}


#########
# BEGIN #
#########
class Application:
    """ Command dispatcher. """
    def __init__(self):
        #############
        # Constants #
        #############
        self.NAME = 'HoneyNet'
        self.VERSION = '1.0.0'
        self.EDITED = 'October 19, 2026'

        # Create menu settings dictionary
        self._app_info = {
            'name': self.NAME,
            'version': self.VERSION,
            'last_edited': self.EDITED
        }

        # Load menus
        self.menu = mainmenu.MainMenu(self._app_info)

        # Run state, set per command
        self.config = None
        self.artifacts = None
        self.plot = False
        self.threads = 1

        # Create callback dictionary
        self.event_callbacks = {
            'bands': self._on_bands,
            'gaps': self._on_gaps,
            'regions': self._on_regions,
            'sweep': self._on_sweep,
            'resonator': self._on_resonator,
            'waveguide-modes': self._on_waveguide_modes,
            'tune': self._on_tune,
            'couple': self._on_couple,
            'patch': self._on_patch,
            'audit': self._on_audit,
            'shield': self._on_shield,
        }


    def run(self, argv=None):
        """ Parse argv, run one command and return its exit status. """
        args = self.menu.parse_args(argv)
        print(f"\ncontroller: {self.NAME} {self.VERSION}: {args.command}")
        status = 'ok'
        try:
            if args.command == 'plot':
                self.render(args.artifact, args.kind, args.mesh, args.out)
                return EXIT_OK
            self._setup(args)
            code = self.event_callbacks[args.command]()
            if code == EXIT_VERDICT:
                status = 'verdict failed'
            return code
        except VALIDATION_ERRORS as exc:
            status = f'invalid: {exc}'
            print(f"controller: {exc}")
            return EXIT_CONFIG
        except SOLVER_ERRORS as exc:
            status = f'failed: {exc}'
            print(f"controller: {exc}")
            return EXIT_SOLVER
        finally:
            if self.artifacts is not None:
                self.artifacts.write_manifest(status)


    ###################
    # Setup Functions #
    ###################
    def _setup(self, args):
        """ Load configuration, apply overrides, create the writer. """
        if args.config is None:
            self.config = configmodel.RunConfigModel.reference_design()
        else:
            self.config = configmodel.RunConfigModel(args.config)
        for assignment in args.override:
            self.config.override(assignment)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError('--threads', 'must be at least 1')
            self.threads = args.threads
        else:
            self.threads = self.config.threads()
        self.plot = args.plot or self.config.get('output.plot')

        self.material = self.config.material().validate()
        self.solver_opts = self.config.solver_opts()
        self.min_gap_width = self.config.min_gap_width()
        kwargs = {} if args.out is None else {'data_dir_name': args.out}
        self.artifacts = artifactmodel.ArtifactModel(
            args.command, self.config, self.VERSION, **kwargs)


    def _dispersion(self, label, solver=None):
        spec = self.config.waveguide(label).validate()
        return bandsmodel.dispersion(spec, self.material,
                                     threads=self.threads, solver=solver,
                                     label=label, **self.solver_opts)


    def _cell_solver(self, label):
        spec = self.config.waveguide(label).validate()
        opts = self.solver_opts
        return bandsmodel.cell_solver(spec, self.material, opts['target_h'],
                                      opts['min_angle'], opts['tol'])


    def _write_bands(self, bs, gaps, regions=None):
        self.artifacts.write_frame(f'bands_{bs.label}.csv',
                                   bandsmodel.band_frame(bs))
        self.artifacts.write_json(f'gaps_{bs.label}.json', gaps.to_dict())
        if self.plot:
            path = self.artifacts.reserve(f'bands_{bs.label}.svg')
            bandview.band_diagram(bs, path, gaps, regions)


    def _all_gaps(self):
        gaps = {}
        for label in ('A', 'B', 'C'):
            bs = self._dispersion(label)
            gaps[label] = bandsmodel.detect_gaps(bs, self.min_gap_width)
            self._write_bands(bs, gaps[label])
        return gaps


    #####################
    # Command Callbacks #
    #####################
    def _on_bands(self):
        self._all_gaps()
        return EXIT_OK


    def _on_gaps(self):
        """ Gaps with edges sharpened between k samples. """
        for label in ('A', 'B', 'C'):
            solver = self._cell_solver(label)
            bs = self._dispersion(label, solver)
            gaps = bandsmodel.detect_gaps(bs, self.min_gap_width)
            refined = bandsmodel.refine_gap_edges(solver, bs, gaps)
            self._write_bands(bs, refined)
        return EXIT_OK


    def _on_regions(self):
        gaps = self._all_gaps()
        regions = bandsmodel.classify_regions(gaps['A'], gaps['B'],
                                              gaps['C'])
        self.artifacts.write_json('regions.json', regions.to_dict())
        for name, intervals in regions.items():
            spans = ', '.join(f'({lo * 1e-9:.4f}, {hi * 1e-9:.4f})'
                              for lo, hi in intervals)
            print(f"controller: Region {name}: {spans or 'empty'}")
        return EXIT_OK


    def _on_sweep(self):
        label = self.config.get('sweep.waveguide')
        param = self.config.get('sweep.param')
        if param not in SWEEP_PARAMS:
            raise ConfigError('sweep.param', f"unknown parameter '{param}'")
        spec = self.config.waveguide(label)
        delta = self.config.get('sweep.delta_nm') * 1e-9
        points = bandsmodel.robustness_sweep(
            spec, self.material, param, delta,
            self.config.get('sweep.n_steps'), self.min_gap_width,
            threads=self.threads, label=label, **self.solver_opts)

        filename = f'sweep_{label}_{param}.csv'
        n_gaps = 0
        for p in points:
            intervals = [] if p.gaps is None else p.gaps.gaps.intervals
            n_gaps = max(n_gaps, len(intervals))
            rows = intervals or [(math.nan, math.nan)]
            for i, (lo, hi) in enumerate(rows):
                self.artifacts.append_row(filename, {
                    'param': param,
                    'value_um': p.value * 1e6,
                    'gap_index': i if intervals else -1,
                    'lo_GHz': lo * 1e-9,
                    'hi_GHz': hi * 1e-9,
                    'error': p.error,
                })
        spreads = {}
        for i in range(n_gaps):
            lo, hi = bandsmodel.gap_edge_spread(points, i)
            spreads[f'gap_{i}'] = {'lower_edge_spread_MHz': lo * 1e-6,
                                   'upper_edge_spread_MHz': hi * 1e-6}
        self.artifacts.write_json(f'sweep_{label}_{param}_spread.json',
                                  spreads)
        if self.plot:
            frame = pd.read_csv(self.artifacts.run_directory / filename)
            path = self.artifacts.reserve(f'sweep_{label}_{param}.svg')
            bandview.gap_sweep(frame, path, f"Waveguide {label}")
        return EXIT_OK


    def _write_modes(self, mesh, modes, prefix='mode'):
        self.artifacts.write_text('mesh.txt', mesh.to_text())
        for i, m in enumerate(modes):
            name = f'{prefix}_{i:02d}'
            self.artifacts.write_text(f'{name}.txt', m.to_text())
            if self.plot:
                path = self.artifacts.reserve(f'{name}.svg')
                fieldview.mode_field(mesh, m, path)


    def _on_resonator(self):
        catalog = devicemodel.resonator_modes(
            self.config.resonator(), self.material,
            self.config.device_window(), self.config.resonator_h(),
            tol=self.solver_opts['tol'],
            min_angle=self.solver_opts['min_angle'])
        self.artifacts.write_text('resonator_modes.json', catalog.to_json())
        self._write_modes(catalog.ops.mesh, [e.mode for e in catalog])
        return EXIT_OK


    def _on_waveguide_modes(self):
        label = self.config.get('devices.label')
        length = general.um2m(self.config.get('devices.L_um'))
        catalog = devicemodel.finite_waveguide_modes(
            self.config.waveguide(label), length, self.material,
            self.config.device_window(), self.solver_opts['target_h'],
            self.solver_opts['tol'], self.solver_opts['min_angle'],
            bands=self._dispersion(label))
        self.artifacts.write_text('waveguide_modes.json', catalog.to_json())
        self._write_modes(catalog.ops.mesh, [e.mode for e in catalog])
        return EXIT_OK


    def _on_tune(self):
        label = self.config.get('tune.waveguide')
        f_target = general.ghz2hz(self.config.get('tune.f_target_GHz'))
        L_range = (general.um2m(self.config.get('tune.L_min_um')),
                   general.um2m(self.config.get('tune.L_max_um')))
        length, f = devicemodel.tune_length(
            self.config.waveguide(label), self.material, f_target, L_range,
            self.solver_opts['target_h'], self.solver_opts['tol'])
        self.artifacts.write_json('tune.json', {
            'waveguide': label,
            'f_target_GHz': f_target * 1e-9,
            'L_um': length * 1e6,
            'frequency_GHz': f * 1e-9,
        })
        return EXIT_OK


    def _on_couple(self):
        label = self.config.get('devices.label')
        res = self.config.resonator()
        wg = self.config.waveguide(label)
        length = self.config.network().length(label)
        f_center = general.ghz2hz(self.config.get('devices.f_center_GHz'))
        window = self.config.get('devices.window_MHz') * 1e6
        tol = self.solver_opts['tol']

        catalog = devicemodel.resonator_modes(
            res, self.material, (f_center - window, f_center + window),
            self.config.resonator_h(), tol=tol)
        reference = catalog.nearest(f_center)
        assembly = geometrymodel.subsystem_assembly(res, wg, length,
                                                    label=label)
        triplet, chosen, ops = devicemodel.coupled_triplet(
            assembly, self.material, f_center, window, res, label,
            reference, target_h=self.solver_opts['target_h'], tol=tol,
            wg_spec=wg, return_modes=True)
        estimate = devicemodel.extract_coupling(triplet)
        dark = devicemodel.dark_mode_fraction(ops, chosen[1],
                                              assembly.parts['waveguide'])
        self.artifacts.write_json('couple.json', {
            'waveguide': label,
            'triplet_GHz': [f * 1e-9 for f in triplet.as_list()],
            'coupling': estimate.to_dict(),
            'dark_mode_waveguide_fraction': dark,
            'dark_mode': devicemodel.is_dark(dark),
            'reference_GHz': (None if reference is None
                              else reference.frequency * 1e-9),
        })
        self._write_modes(ops.mesh, chosen, prefix='triplet')
        return EXIT_OK


    def _write_layout(self, graph, shield_centers=None, shield=None):
        data = {'graph': graph.to_dict(),
                'outlines_um': networkmodel.layout_outlines(graph)}
        if shield_centers is not None:
            data['shield_centers_um'] = [general.m2um(list(c))
                                         for c in shield_centers]
            data['shield_period_um'] = shield.period_h * 1e6
        path = self.artifacts.write_json('layout.json', data)
        if self.plot:
            self._render_layout(path, self.artifacts.reserve('layout.svg'))


    def _on_patch(self):
        spec = self.config.network()
        graph = networkmodel.honeycomb_layout(spec)
        self._write_layout(graph)
        edge = graph.edge(self.config.get('network.edge_id'))
        patch = networkmodel.patch_region(
            graph, edge.id, self.config.get('network.stub_periods'))
        f_center = general.ghz2hz(self.config.get('devices.f_center_GHz'))
        window = self.config.get('devices.window_MHz') * 1e6
        entry = networkmodel.localization_check(
            patch, self.material, f_center, spec.resonator, edge.label,
            window, target_h=self.solver_opts['target_h'],
            tol=self.solver_opts['tol'],
            wg_spec=spec.waveguides[edge.label])
        self.artifacts.write_json('patch.json', entry.to_dict())
        return EXIT_OK


    def _on_audit(self):
        spec = self.config.network()
        solver_opts = dict(self.solver_opts)
        solver_opts['resonator_h'] = self.config.resonator_h()
        solver_opts['min_gap_width'] = self.min_gap_width
        patch_opts = {
            'stub_periods': self.config.get('network.stub_periods'),
            'window': self.config.get('devices.window_MHz') * 1e6,
            'target_h': self.solver_opts['target_h'],
        }
        shield = (self.config.shield().validate()
                  if self.config.get('shield.enabled') else None)
        report = networkmodel.closed_subsystem_audit(
            spec, self.material, self.config.mode_targets(),
            self.config.device_window(), solver_opts, patch_opts, shield,
            self.threads)
        self.artifacts.write_text('audit.json',
                                  networkmodel.audit_json(report) + '\n')
        for entry in report.entries:
            verdict = 'PASS' if entry.passed else 'FAIL'
            print(f"controller: {entry.name}: region {entry.region} "
                  f"(expected {entry.expected_region}) {verdict}")
        return EXIT_OK if report.passed else EXIT_VERDICT


    def _on_shield(self):
        shield = self.config.shield().validate()
        opts = self.solver_opts
        bs = bandsmodel.dispersion_2d(
            shield, self.material, self.config.get('shield.n_per_leg'),
            opts['n_bands'], opts['f_max'], min_angle=opts['min_angle'],
            tol=opts['tol'], threads=self.threads)
        gaps = bandsmodel.detect_gaps(bs, self.min_gap_width)
        self._write_bands(bs, gaps)

        targets = sorted(self.config.mode_targets().values())
        dom = bandsmodel.dominant_gap(gaps)
        covers = dom is not None and all(dom[0] < f < dom[1]
                                         for f in targets)
        self.artifacts.write_json('shield.json', {
            'void_fraction': geometrymodel.shield_void_fraction(shield),
            'gaps': gaps.to_dict(),
            'dominant_gap_GHz': (None if dom is None
                                 else [dom[0] * 1e-9, dom[1] * 1e-9]),
            'operating_GHz': [f * 1e-9 for f in targets],
            'covers': bool(covers),
        })
        spec = self.config.network()
        if spec.rows and spec.cols:
            graph = networkmodel.honeycomb_layout(spec)
            centers, _ = networkmodel.shield_frame(
                graph, shield, general.um2m(self.config.get(
                    'shield.linker_um')))
            self._write_layout(graph, centers, shield)
        print(f"controller: Shield gap covers operating frequencies: "
              f"{covers}")
        return EXIT_OK if covers else EXIT_VERDICT


    ##################
    # Plot Functions #
    ##################
    def render(self, artifact, kind, mesh_path=None, out=None):
        """ Render an artifact file to SVG. """
        artifact = Path(artifact)
        if not artifact.is_file():
            raise ArtifactMismatch(kind, str(artifact))
        out = Path(out) if out else artifact.with_suffix('.svg')
        if kind == 'band-diagram':
            bs = bandsmodel.read_band_csv(artifact)
            bs.label = artifact.stem.replace('bands_', '')
            gaps = self._sibling_gaps(artifact, bs.label)
            return bandview.band_diagram(bs, out, gaps)
        if kind == 'gap-sweep':
            frame = self._read_frame(artifact, kind,
                                     {'param', 'value_um', 'gap_index',
                                      'lo_GHz', 'hi_GHz'})
            return bandview.gap_sweep(frame, out)
        if kind == 'mode-field':
            mesh_path = (Path(mesh_path) if mesh_path
                         else artifact.parent / 'mesh.txt')
            try:
                mode = elasticitymodel.read_mode(artifact)
                mesh = meshmodel.read_mesh(mesh_path)
            except (ValueError, KeyError, IndexError, FileNotFoundError):
                raise ArtifactMismatch(kind, str(artifact))
            if len(mode.displacement) != mesh.n_nodes:
                raise ArtifactMismatch(kind, str(artifact))
            return fieldview.mode_field(mesh, mode, out)
        if kind == 'layout':
            return self._render_layout(artifact, out)
        raise ArtifactMismatch(kind, str(artifact))


    @staticmethod
    def _sibling_gaps(artifact, label):
        """ Gap set written next to a band CSV, if any. """
        path = artifact.parent / f'gaps_{label}.json'
        if not path.is_file():
            return None
        with open(path, 'r') as fh:
            return bandsmodel.GapSet.from_dict(json.load(fh))


    @staticmethod
    def _read_frame(artifact, kind, columns):
        try:
            frame = pd.read_csv(artifact)
        except (pd.errors.ParserError, pd.errors.EmptyDataError,
                UnicodeDecodeError):
            raise ArtifactMismatch(kind, str(artifact))
        if not columns <= set(frame.columns):
            raise ArtifactMismatch(kind, str(artifact))
        return frame


    @staticmethod
    def _render_layout(artifact, out):
        try:
            with open(artifact, 'r') as fh:
                data = json.load(fh)
            outlines = data['outlines_um']
        except (json.JSONDecodeError, KeyError, TypeError,
                UnicodeDecodeError):
            raise ArtifactMismatch('layout', str(artifact))
        return layoutview.layout_plot(outlines, out,
                                      data.get('shield_centers_um'),
                                      data.get('shield_period_um'))


def main(argv=None):
    return Application().run(argv)


if __name__ == "__main__":
    sys.exit(main())
