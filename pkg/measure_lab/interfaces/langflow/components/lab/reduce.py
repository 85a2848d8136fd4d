"""Reduced Measure Component

Langflow component computing μ* by truncation, mollification or both.
"""

import json

from lfx.custom.custom_component.component import Component
from lfx.io import StrInput, IntInput, DropdownInput, Output
from lfx.schema import Data
try:
    from measure_lab.interfaces.langflow.adapters.lab_component_adapter import LabComponentAdapter
except ImportError:
    import sys, os
    package_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(
        os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))))
    if package_root not in sys.path:
        sys.path.insert(0, package_root)
    from measure_lab.interfaces.langflow.adapters.lab_component_adapter import LabComponentAdapter


class ReduceComponent(Component):
    """Reduced Measure Component

    Runs the truncation ladder f_k = min(f, k) and/or the mollification
    family ρ_n ∗ μ and reports the limit solution with the extracted measure.
    """

    display_name: str = "Reduced Measure"
    description: str = "Compute the reduced measure μ* and the atoms removed by the limit"
    icon: str = "filter"
    priority: int = 80
    name: str = "lab_reduce"

    inputs = [
        StrInput(
            name="config_json",
            display_name="Experiment Config (JSON)",
            info="Experiment config with nonlinearity, measure and grids",
            required=True
        ),
        DropdownInput(
            name="scheme",
            display_name="Scheme",
            options=["config", "truncation", "mollification", "both"],
            value="config",
            info="Limit scheme; 'config' keeps the scheme from the config"
        ),
        StrInput(
            name="out_dir",
            display_name="Output Directory",
            value="mplab_out/reduce",
            required=False
        ),
        IntInput(
            name="jobs",
            display_name="Jobs",
            value=1,
            required=False
        ),
    ]

    outputs = [
        Output(name="reduce_output", display_name="Reduction Report", method="build_reduce"),
    ]

    def build_reduce(self) -> Data:
        """Run the reduce pipeline and return the report."""
        try:
            config = json.loads(self.config_json)
        except json.JSONDecodeError as e:
            error_msg = f"JSON Parse Error: {str(e)}"
            self.status = f"✗ {error_msg}"
            return Data(data={'success': False, 'error': error_msg})
        if self.scheme and self.scheme != "config" and isinstance(config, dict):
            config['scheme'] = self.scheme

        result = LabComponentAdapter.create("reduce", self.jobs or 1).run(config, self.out_dir)
        if result.data.get('success'):
            atoms = sum(
                len(g['atom_masses']) for g in result.data['report']['grids']
            )
            self.status = f"✓ {result.data['message']} ({atoms} atom(s) extracted)"
        else:
            self.status = f"✗ {result.data.get('error')}"
        return result
