"""Training Configuration Validation Module.

Checks a TrainingConfig for correctness and consistency before any corpus is read or
parameter allocated, so configuration mistakes surface with a descriptive message.
"""

from typing import Any, Dict

from spnet_summarizer.exceptions import ConfigurationError
from spnet_summarizer.numcore.tensor import PRECISIONS
from spnet_summarizer.training.config import TrainingConfig


def validate_training_config(config: TrainingConfig) -> bool:
    """Validate training parameters.

    Args:
        config: The configuration to check.

    Returns:
        bool: True if all validations pass

    Raises:
        ConfigurationError: If any validation fails with descriptive error message
    """
    params = config.to_dict()

    # === BASIC TYPE AND EXISTENCE CHECKS ===
    _validate_required_params(params)

    # === OBJECTIVE PARAMETERS ===
    _validate_objective_params(params)

    # === OPTIMIZER PARAMETERS ===
    _validate_optimizer_params(params)

    # === SCHEDULE PARAMETERS ===
    _validate_schedule_params(params)

    # === DECODING PARAMETERS ===
    _validate_decoding_params(params)

    # === MODEL PARAMETERS ===
    _validate_model_params(params)

    return True


def _validate_required_params(params: Dict[str, Any]) -> None:
    """Validate parameter types."""
    integer_params = (
        "batch_size", "max_epochs", "seed", "beam_size", "max_decode_len",
        "embedding_dim", "encoder_hidden", "decoder_hidden", "attention_dim",
        "output_hidden", "classifier_hidden",
    )
    real_params = ("lambda_domain", "learning_rate", "beta1", "beta2", "adam_epsilon")

    for param in integer_params:
        value = params[param]
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"Parameter '{param}' must be an integer, got {value!r}")
    for param in real_params:
        value = params[param]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"Parameter '{param}' must be a number, got {value!r}")
    for param in ("use_slot_scaffold", "use_speaker_roles", "lr_halving"):
        if not isinstance(params[param], bool):
            raise ConfigurationError(f"Parameter '{param}' must be true or false, got {params[param]!r}")


def _validate_objective_params(params: Dict[str, Any]) -> None:
    """Validate the joint objective."""
    if params["lambda_domain"] < 0:
        raise ConfigurationError("Domain loss weight lambda_domain must be non-negative")


def _validate_optimizer_params(params: Dict[str, Any]) -> None:
    """Validate Adam hyperparameters."""
    if params["learning_rate"] < 0:
        raise ConfigurationError("Learning rate must be non-negative")

    if not 0 <= params["beta1"] < 1:
        raise ConfigurationError("beta1 must be in [0, 1)")

    if not 0 <= params["beta2"] < 1:
        raise ConfigurationError("beta2 must be in [0, 1)")

    if params["adam_epsilon"] <= 0:
        raise ConfigurationError("adam_epsilon must be positive")

    max_norm = params["max_grad_norm"]
    if max_norm is not None and max_norm <= 0:
        raise ConfigurationError("max_grad_norm must be positive or unset")


def _validate_schedule_params(params: Dict[str, Any]) -> None:
    """Validate batching, epochs and precision."""
    if params["batch_size"] < 1:
        raise ConfigurationError("Batch size must be at least 1")

    if params["max_epochs"] < 0:
        raise ConfigurationError("max_epochs must be non-negative")

    convergence = params["convergence_loss"]
    if convergence is not None and convergence <= 0:
        raise ConfigurationError("convergence_loss must be positive or unset")

    if params["precision"] not in PRECISIONS:
        raise ConfigurationError(f"Precision must be one of {sorted(PRECISIONS)}, got '{params['precision']}'")


def _validate_decoding_params(params: Dict[str, Any]) -> None:
    """Validate beam search settings."""
    if params["beam_size"] < 1:
        raise ConfigurationError("Beam size must be at least 1")

    if params["max_decode_len"] < 0:
        raise ConfigurationError("max_decode_len must be non-negative")

    for penalty in ("length_penalty", "coverage_penalty"):
        value = params[penalty]
        if value is not None and value < 0:
            raise ConfigurationError(f"{penalty} must be non-negative or unset")


def _validate_model_params(params: Dict[str, Any]) -> None:
    """Validate layer sizes and their consistency."""
    for param in ("embedding_dim", "encoder_hidden", "decoder_hidden", "attention_dim",
                  "output_hidden", "classifier_hidden"):
        if params[param] < 1:
            raise ConfigurationError(f"{param} must be positive")

    if params["encoder_hidden"] % 2:
        raise ConfigurationError("encoder_hidden must be even (it is split over two directions)")

    # s_0 is the concatenation of the two final encoder states
    if params["decoder_hidden"] != 2 * params["encoder_hidden"]:
        raise ConfigurationError(
            f"decoder_hidden ({params['decoder_hidden']}) must be twice encoder_hidden ({params['encoder_hidden']})"
        )

    vocab_size = params["vocab_size"]
    if vocab_size is not None and vocab_size < 5:
        raise ConfigurationError("vocab_size must leave room for the reserved tokens and at least one word")
