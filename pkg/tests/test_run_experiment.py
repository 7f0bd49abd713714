import unittest
from pathlib import Path
from unittest.mock import MagicMock, patch

from levysmooth.scripts import run_experiment


class TestRunExperiment(unittest.TestCase):
    @patch("levysmooth.scripts.run_experiment.run_file", return_value=0)
    def test_main_invokes_run_file(self, mock_run_file):
        args = MagicMock()
        args.config = Path("config.json")
        args.out = Path("results")
        args.threads = 4
        args.no_timestamp = True
        args.log_level = "INFO"

        self.assertEqual(run_experiment.main(args), 0)
        mock_run_file.assert_called_once_with(
            Path("config.json"), output=Path("results"), threads=4, timestamp=False
        )

    @patch("argparse.ArgumentParser.parse_args")
    @patch("levysmooth.scripts.run_experiment.run_file", return_value=2)
    def test_main_without_overrides(self, mock_run_file, mock_parse_args):
        mock_args = MagicMock()
        mock_args.config = Path("config.json")
        mock_args.out = None
        mock_args.threads = None
        mock_args.no_timestamp = False
        mock_args.log_level = "INFO"
        mock_parse_args.return_value = mock_args

        self.assertEqual(run_experiment.main(None), 2)
        mock_run_file.assert_called_once_with(
            Path("config.json"), output=None, threads=None, timestamp=None
        )


if __name__ == "__main__":  # pragma: no cover
    unittest.main()
