import json
import unittest
from pathlib import Path
from shutil import rmtree
from unittest.mock import MagicMock, patch

from levysmooth.scripts import levysmooth_cli

THIS_DIR = Path(__file__).parent
RUN_FILES = THIS_DIR / "test_files/run_files"


class TestLevysmoothCli(unittest.TestCase):
    def setUp(self) -> None:
        RUN_FILES.mkdir(parents=True, exist_ok=True)

    def tearDown(self) -> None:
        rmtree(RUN_FILES)

    @patch("levysmooth.scripts.levysmooth_cli.run_dict", return_value=0)
    def test_main_builds_config(self, mock_run):
        args = MagicMock()
        args.command = "psi"
        args.name = None
        args.seed = 3
        args.out = Path("results")
        args.threads = None
        args.no_timestamp = True
        args.log_level = "INFO"
        args.function = '{"variant": "indicator", "K": 0}'
        args.process = '{"variant": "stable", "beta": 1, "c": 1}'
        args.t_grid = [0.0, 0.5]
        args.n = None

        self.assertEqual(levysmooth_cli.main(args), 0)
        mock_run.assert_called_once_with(
            {
                "name": "psi",
                "operation": "psi",
                "seed": 3,
                "output": "results",
                "timestamp": False,
                "function": '{"variant": "indicator", "K": 0}',
                "process": '{"variant": "stable", "beta": 1, "c": 1}',
                "parameters": {"t_grid": [0.0, 0.5]},
            }
        )

    @patch("levysmooth.scripts.levysmooth_cli.get_args")
    @patch("levysmooth.scripts.levysmooth_cli.run_dict", return_value=3)
    def test_main_parses_args(self, mock_run, mock_get_args):
        args = MagicMock()
        args.command = "verify"
        args.name = "suite"
        args.seed = 0
        args.out = Path(".")
        args.threads = 2
        args.no_timestamp = False
        args.log_level = "INFO"
        args.suite = []
        mock_get_args.return_value = args

        self.assertEqual(levysmooth_cli.main(None), 3)
        config = mock_run.call_args[0][0]
        self.assertEqual(config["threads"], 2)
        self.assertEqual(config["name"], "suite")
        self.assertEqual(config["parameters"], {"suite": []})

    def test_get_args(self):
        args = levysmooth_cli.get_args(
            ["fit-theta", "--process", "{}", "--theta", "0.5", "--log-correction", "--seed", "9"]
        )
        self.assertEqual(args.command, "fit-theta")
        self.assertEqual(args.theta, 0.5)
        self.assertTrue(args.log_correction)
        self.assertEqual(args.seed, 9)
        self.assertIsNone(args.t_grid)

        args = levysmooth_cli.get_args(["fn", "eval", "--x", "0", "1"])
        self.assertEqual(args.action, "eval")
        self.assertEqual(args.x, [0.0, 1.0])

    def test_end_to_end(self):
        args = levysmooth_cli.get_args(
            [
                "moments",
                "--measure",
                '{"variant": "symmetric_stable", "b": 1, "beta": 0.5}',
                "--xi",
                "1",
                "--out",
                str(RUN_FILES),
                "--no-timestamp",
            ]
        )
        self.assertEqual(levysmooth_cli.main(args), 0)
        report = json.loads((RUN_FILES / "moments.json").read_text())
        self.assertAlmostEqual(report["result"]["moments"][0]["value"], 8.0)
        header = (RUN_FILES / "moments.csv").read_text().splitlines()[0]
        self.assertEqual(header, "xi,value,finite,abs_error,method")

    def test_invalid_spec_exit_code(self):
        args = levysmooth_cli.get_args(
            ["sample", "--process", '{"variant": "stable", "beta": 2.5, "c": 1}', "--out", str(RUN_FILES)]
        )
        self.assertEqual(levysmooth_cli.main(args), 2)
        self.assertEqual(list(RUN_FILES.iterdir()), [])


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
