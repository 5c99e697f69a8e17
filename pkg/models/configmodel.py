""" Model for storing run parameters.

    Every numeric parameter lives in a block of the class-level fields
    table, with its declared type and unit. Values are read from and
    written to JSON files of the form {"block": {"key": value}}.
"""

###########
# Imports #
###########
# Standard library
import copy
import json
import os
from pathlib import Path

# Custom modules
from app_assets import config as config_assets
from exceptions.config_exceptions import ConfigError
from functions import general
from models import geometrymodel
from models import networkmodel


#############
# Constants #
#############
THREADS_ENV = 'HONEYNET_THREADS'
BOOL_STRINGS = {'true': True, 'yes': True, '1': True,
                'false': False, 'no': False, '0': False}


##################
# RunConfigModel #
##################
class RunConfigModel:
    # Shared defaults (class variable); instances work on a deep copy
    fields = {
        'material': {
            'E_GPa': {'type': 'float', 'value': 1050.0, 'unit': 'GPa'},
            'nu': {'type': 'float', 'value': 0.2, 'unit': ''},
            'rho_kg_m3': {'type': 'float', 'value': 3539.0,
                          'unit': 'kg/m^3'},
            'thickness_um': {'type': 'float', 'value': 0.3, 'unit': 'um'},
        },
        'waveguide_A': {
            'd_um': {'type': 'float', 'value': 6.0, 'unit': 'um'},
            'w_um': {'type': 'float', 'value': 3.0, 'unit': 'um'},
            'a_um': {'type': 'float', 'value': 1.1, 'unit': 'um'},
            'b_um': {'type': 'float', 'value': 0.3, 'unit': 'um'},
        },
        'waveguide_B': {
            'd_um': {'type': 'float', 'value': 4.0, 'unit': 'um'},
            'w_um': {'type': 'float', 'value': 3.0, 'unit': 'um'},
            'a_um': {'type': 'float', 'value': 1.1, 'unit': 'um'},
            'b_um': {'type': 'float', 'value': 0.3, 'unit': 'um'},
        },
        'waveguide_C': {
            'd_um': {'type': 'float', 'value': 7.6, 'unit': 'um'},
            'w_um': {'type': 'float', 'value': 2.0, 'unit': 'um'},
            'a_um': {'type': 'float', 'value': 0.8, 'unit': 'um'},
            'b_um': {'type': 'float', 'value': 0.76, 'unit': 'um'},
        },
        'resonator': {
            's_um': {'type': 'float', 'value': 21.0, 'unit': 'um'},
            's_prime_um': {'type': 'float', 'value': 3.15, 'unit': 'um'},
        },
        'shield': {
            'h_um': {'type': 'float', 'value': 3.8, 'unit': 'um'},
            'h_prime_um': {'type': 'float', 'value': 3.5, 'unit': 'um'},
            'l_um': {'type': 'float', 'value': 1.0, 'unit': 'um'},
            'linker_um': {'type': 'float', 'value': 5.0, 'unit': 'um'},
            'n_per_leg': {'type': 'int', 'value': 10, 'unit': ''},
            'enabled': {'type': 'bool', 'value': False, 'unit': ''},
        },
        'network': {
            'L_A_um': {'type': 'float', 'value': 86.3, 'unit': 'um'},
            'L_B_um': {'type': 'float', 'value': 86.3, 'unit': 'um'},
            'L_C_um': {'type': 'float', 'value': 91.2, 'unit': 'um'},
            'rows': {'type': 'int', 'value': 1, 'unit': ''},
            'cols': {'type': 'int', 'value': 1, 'unit': ''},
            'stub_periods': {'type': 'int', 'value': 3, 'unit': ''},
            'edge_id': {'type': 'int', 'value': 0, 'unit': ''},
        },
        'solver': {
            # 0 selects the automatic mesh size
            'target_h_um': {'type': 'float', 'value': 0.0, 'unit': 'um'},
            'resonator_h_um': {'type': 'float', 'value': 0.0, 'unit': 'um'},
            'min_angle': {'type': 'float', 'value': 25.0, 'unit': 'deg'},
            'n_k': {'type': 'int', 'value': 25, 'unit': ''},
            'n_bands': {'type': 'int', 'value': 8, 'unit': ''},
            'f_max_GHz': {'type': 'float', 'value': 2.5, 'unit': 'GHz'},
            'tol': {'type': 'float', 'value': 1e-9, 'unit': ''},
            # Positive gaps at or below this width are not reported
            'min_gap_kHz': {'type': 'float', 'value': 0.0, 'unit': 'kHz'},
            'threads': {'type': 'int', 'value': 1, 'unit': ''},
        },
        'devices': {
            'mode_a_GHz': {'type': 'float', 'value': 1.7339, 'unit': 'GHz'},
            'mode_b_GHz': {'type': 'float', 'value': 0.9634, 'unit': 'GHz'},
            'mode_c_GHz': {'type': 'float', 'value': 1.3388, 'unit': 'GHz'},
            'mode_d_GHz': {'type': 'float', 'value': 1.1691, 'unit': 'GHz'},
            'f_lo_GHz': {'type': 'float', 'value': 0.85, 'unit': 'GHz'},
            'f_hi_GHz': {'type': 'float', 'value': 1.85, 'unit': 'GHz'},
            'label': {'type': 'str', 'value': 'C', 'unit': ''},
            'f_center_GHz': {'type': 'float', 'value': 1.3388,
                             'unit': 'GHz'},
            'window_MHz': {'type': 'float', 'value': 60.0, 'unit': 'MHz'},
            'L_um': {'type': 'float', 'value': 91.2, 'unit': 'um'},
        },
        'sweep': {
            'waveguide': {'type': 'str', 'value': 'C', 'unit': ''},
            'param': {'type': 'str', 'value': 'a', 'unit': ''},
            'delta_nm': {'type': 'float', 'value': 100.0, 'unit': 'nm'},
            'n_steps': {'type': 'int', 'value': 9, 'unit': ''},
        },
        'tune': {
            'waveguide': {'type': 'str', 'value': 'C', 'unit': ''},
            'f_target_GHz': {'type': 'float', 'value': 1.3388,
                             'unit': 'GHz'},
            'L_min_um': {'type': 'float', 'value': 80.0, 'unit': 'um'},
            'L_max_um': {'type': 'float', 'value': 100.0, 'unit': 'um'},
        },
        'output': {
            'directory': {'type': 'str', 'value': 'runs', 'unit': ''},
            'plot': {'type': 'bool', 'value': False, 'unit': ''},
        },
    }

    ###########
    # Methods #
    ###########
    def __init__(self, filepath=None):
        """ Start from the built-in defaults. Load values if a config
            file is given.
        """
        self.fields = copy.deepcopy(RunConfigModel.fields)
        self.filepath = None if filepath is None else Path(filepath)
        if self.filepath is not None:
            self.load()


    @classmethod
    def reference_design(cls):
        return cls(config_assets.REFERENCE_DESIGN_JSON)


    def load(self):
        """ Load run parameters from file. """
        print(f"\nconfigmodel: Reading parameters from {self.filepath}")
        if not self.filepath.exists():
            raise ConfigError(str(self.filepath), 'file not found')
        try:
            with open(self.filepath, 'r') as fh:
                raw_values = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(self.filepath), f'not valid JSON ({exc})')
        if not isinstance(raw_values, dict):
            raise ConfigError(str(self.filepath), 'top level must be a table')

        # Don't implicitly trust the raw values: only take known keys
        for block, entries in raw_values.items():
            if block not in self.fields:
                print(f"configmodel: Ignoring unknown block '{block}'")
                continue
            if not isinstance(entries, dict):
                raise ConfigError(block, 'block must be a table')
            for key, value in entries.items():
                if key not in self.fields[block]:
                    print(f"configmodel: Ignoring unknown key "
                          f"'{block}.{key}'")
                    continue
                self.set(f'{block}.{key}', value)


    def save(self, filepath=None):
        """ Write the current values to file. """
        path = Path(filepath) if filepath is not None else self.filepath
        if path is None:
            raise ConfigError('output', 'no file path to save to')
        with open(path, 'w') as fh:
            fh.write(self.to_json())


    def _entry(self, dotted):
        try:
            block, key = dotted.split('.', 1)
        except ValueError:
            raise ConfigError(dotted, "expected 'block.key'")
        if block not in self.fields or key not in self.fields[block]:
            raise ConfigError(dotted, 'unknown parameter')
        return self.fields[block][key]


    def get(self, dotted):
        return self._entry(dotted)['value']


    def set(self, dotted, value):
        """ Set a variable value, checking its declared type. """
        entry = self._entry(dotted)
        kind = entry['type']
        if kind == 'float' and type(value).__name__ == 'int':
            value = float(value)
        if type(value).__name__ != kind:
            raise ConfigError(dotted, f"expected {kind}, got "
                              f"{type(value).__name__}")
        entry['value'] = value


    def override(self, assignment):
        """ Apply a 'block.key=value' string, parsed with the declared
            type of the field.
        """
        if '=' not in assignment:
            raise ConfigError(assignment, "expected 'block.key=value'")
        dotted, text = assignment.split('=', 1)
        dotted = dotted.strip()
        kind = self._entry(dotted)['type']
        text = text.strip()
        try:
            if kind == 'bool':
                value = BOOL_STRINGS[text.lower()]
            elif kind == 'int':
                value = int(text)
            elif kind == 'float':
                value = float(text)
            else:
                value = text
        except (KeyError, ValueError):
            raise ConfigError(dotted, f"cannot read '{text}' as {kind}")
        self.set(dotted, value)


    def to_dict(self):
        return {block: {key: entry['value'] for key, entry in keys.items()}
                for block, keys in self.fields.items()}


    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + '\n'


    def config_hash(self):
        return general.canonical_hash(self.to_dict())


    def threads(self):
        """ Worker count: the environment variable wins over the file. """
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                count = int(env)
            except ValueError:
                raise ConfigError(THREADS_ENV, f"cannot read '{env}' as int")
        else:
            count = self.get('solver.threads')
        if count < 1:
            raise ConfigError('solver.threads', 'must be at least 1')
        return count


    ############
    # Builders #
    ############
    def _block(self, name):
        return self.to_dict()[name]


    def material(self):
        m = self._block('material')
        return geometrymodel.Material.from_config(
            m['E_GPa'], m['nu'], m['rho_kg_m3'], m['thickness_um'])


    def waveguide(self, label):
        if label not in ('A', 'B', 'C'):
            raise ConfigError('waveguide', f"unknown waveguide '{label}'")
        w = self._block(f'waveguide_{label}')
        return geometrymodel.WaveguideSpec.from_um(
            w['d_um'], w['w_um'], w['a_um'], w['b_um'])


    def resonator(self):
        r = self._block('resonator')
        return geometrymodel.ResonatorSpec.from_um(r['s_um'],
                                                   r['s_prime_um'])


    def shield(self):
        s = self._block('shield')
        return geometrymodel.ShieldSpec.from_um(s['h_um'], s['h_prime_um'],
                                                s['l_um'])


    def network(self):
        n = self._block('network')
        return networkmodel.NetworkSpec(
            L_A=general.um2m(n['L_A_um']),
            L_B=general.um2m(n['L_B_um']),
            L_C=general.um2m(n['L_C_um']),
            rows=n['rows'], cols=n['cols'],
            resonator=self.resonator(),
            waveguides={k: self.waveguide(k) for k in ('A', 'B', 'C')},
        )


    def solver_opts(self):
        """ Keyword arguments for the dispersion solvers. """
        s = self._block('solver')
        return {
            'n_k': s['n_k'],
            'n_bands': s['n_bands'],
            'f_max': general.ghz2hz(s['f_max_GHz']),
            'target_h': general.um2m(s['target_h_um']) or None,
            'min_angle': s['min_angle'],
            'tol': s['tol'],
        }


    def resonator_h(self):
        return general.um2m(self.get('solver.resonator_h_um')) or None


    def min_gap_width(self):
        """ Minimum reportable gap width in Hz. """
        width = self.get('solver.min_gap_kHz') * 1e3
        if width < 0:
            raise ConfigError('solver.min_gap_kHz', 'must be >= 0')
        return width


    def mode_targets(self):
        d = self._block('devices')
        return {name: general.ghz2hz(d[f'{name}_GHz'])
                for name in ('mode_a', 'mode_b', 'mode_c', 'mode_d')}


    def device_window(self):
        d = self._block('devices')
        return general.ghz2hz(d['f_lo_GHz']), general.ghz2hz(d['f_hi_GHz'])
