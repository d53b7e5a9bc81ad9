import pytest
import os
from unittest.mock import patch
from src.config import Config, Limits, LimitExceededError, check_limit, parse_field_spec


class TestLimits:
    """Test Limits defaults"""

    def test_default_values(self):
        assert Limits.LATTICE_LIMIT == 5040
        assert Limits.ISO_LIMIT == 720
        assert Limits.ELEMENT_CACHE_LIMIT == 20000

    def test_check_limit_passes_at_limit(self):
        check_limit('lattice', 120, 120)

    def test_check_limit_message(self):
        with pytest.raises(LimitExceededError, match="group too large: order 120 exceeds lattice limit 10") as info:
            check_limit('lattice', 10, 120)
        assert info.value.limit_name == 'lattice'
        assert info.value.limit == 10
        assert info.value.order == 120

    def test_limit_error_is_value_error(self):
        assert issubclass(LimitExceededError, ValueError)


class TestFieldSpec:
    """Test field spec parsing"""

    def test_rationals(self):
        assert parse_field_spec('Q') == 0
        assert parse_field_spec(' q ') == 0

    def test_prime_fields(self):
        assert parse_field_spec('F2') == 2
        assert parse_field_spec('F7') == 7

    def test_non_prime_rejected(self):
        with pytest.raises(ValueError, match="not prime"):
            parse_field_spec('F4')

    def test_garbage_rejected(self):
        with pytest.raises(ValueError, match="expected Q or F<p>"):
            parse_field_spec('R')


class TestConfig:
    """Test Config class"""

    @patch.dict(os.environ, {}, clear=True)
    @patch('src.config.load_dotenv')
    def test_defaults(self, mock_load_dotenv):
        """Test defaults when nothing is configured"""
        mock_load_dotenv.return_value = None
        config = Config()
        assert config.field == 'Q'
        assert config.characteristic == 0
        assert config.lattice_limit == Limits.LATTICE_LIMIT
        assert config.iso_limit == Limits.ISO_LIMIT
        assert config.verify is False
        assert config.output_format == 'text'
        assert config.log_level == 'WARNING'
        assert config.log_file is None

    @patch.dict(os.environ, {
        'BISET_FIELD': 'F3',
        'BISET_LATTICE_LIMIT': '100',
        'BISET_ISO_LIMIT': '60',
        'BISET_VERIFY': 'yes',
        'BISET_OUTPUT': 'json',
    })
    def test_environment_variables(self):
        config = Config()
        assert config.characteristic == 3
        assert config.field_label == 'F3'
        assert config.lattice_limit == 100
        assert config.iso_limit == 60
        assert config.verify is True
        assert config.output_format == 'json'

    @patch.dict(os.environ, {'BISET_FIELD': 'F3', 'BISET_LATTICE_LIMIT': '100'})
    def test_overrides_win(self):
        config = Config(field='F5', lattice_limit=7, iso_limit=None)
        assert config.characteristic == 5
        assert config.lattice_limit == 7
        assert config.iso_limit == Limits.ISO_LIMIT

    def test_invalid_limit(self):
        with patch.dict(os.environ, {'BISET_LATTICE_LIMIT': 'lots'}):
            with pytest.raises(ValueError, match="BISET_LATTICE_LIMIT must be an integer"):
                Config()

    def test_non_positive_limit(self):
        with pytest.raises(ValueError, match="iso_limit must be positive"):
            Config(iso_limit=0)

    def test_invalid_output_format(self):
        with patch.dict(os.environ, {'BISET_OUTPUT': 'yaml'}):
            with pytest.raises(ValueError, match="Invalid output format"):
                Config()

    def test_unknown_override(self):
        with pytest.raises(ValueError, match="Unknown configuration option"):
            Config(colour='blue')
