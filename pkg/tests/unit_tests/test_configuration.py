from spnet_summarizer.configuration import Configuration
from spnet_summarizer.training.config import TrainingConfig


def test_configuration_empty() -> None:
    configuration = Configuration.from_context()
    assert configuration.synthetic_dialogs == 32
    assert configuration.training_config() == TrainingConfig()


def test_training_overrides() -> None:
    configuration = Configuration(training={"lambda_domain": 0.0, "max_epochs": 5})
    config = configuration.training_config()
    assert config.lambda_domain == 0.0
    assert config.max_epochs == 5
