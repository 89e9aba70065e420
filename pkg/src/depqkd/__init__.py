"""Seed-reproducible simulator of a two-step key distribution protocol on
photon pairs entangled in both polarization and frequency."""

from .channel import (
    ChannelConfig,
    ConfigError,
    EveConfig,
    EveRecord,
    EveStrategy,
    EveTarget,
    TransmissionRecord,
    apply_loss,
    ir_attack_decoy,
    ir_attack_entangled,
)
from .device import (
    DeviceOutcome,
    PolarizationPairState,
    convert_in_port,
    decode,
    device_measure,
    device_outcome_distribution,
    device_outcomes,
    device_projective_measurement,
    device_sample_counts,
    measure_single,
    port_of,
    wavelength_convert_global,
)
from .protocol import (
    CheckStrategy,
    DecoyCheckResult,
    DecoyPhoton,
    DecoyPol,
    IndeterminateCheckError,
    Message,
    MessageKind,
    PairRecord,
    ProtocolConfig,
    RunReport,
    Transcript,
    WcCheckResult,
    decoy_check,
    insert_decoys,
    run_session,
    step1_prepare_and_encode,
    wc_check,
)
from .quantum import (
    Freq,
    JointState,
    LocalState,
    MeasurementError,
    Pauli,
    Photon,
    Pol,
    PolBasis,
    ProjectiveMeasurement,
    SeededGenerator,
    StateError,
    apply_local,
    born_distribution,
    equal_up_to_global_phase,
    measure_projective,
    mode_index,
    partial_measure,
    pol_freq_eigenstate,
    polarization_frequency_basis,
    tensor,
)
from .states import (
    DepLabel,
    EncodingPair,
    Family,
    SourceAmplitudes,
    classify,
    codeword_bits,
    codeword_to_encodings,
    codeword_to_label,
    dep_basis,
    encoding_choices,
    encoding_to_label,
    label_to_codeword,
    partner_encoding,
    source_state,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "CheckStrategy",
    "ConfigError",
    "DecoyCheckResult",
    "DecoyPhoton",
    "DecoyPol",
    "DepLabel",
    "DeviceOutcome",
    "EncodingPair",
    "EveConfig",
    "EveRecord",
    "EveStrategy",
    "EveTarget",
    "Family",
    "Freq",
    "IndeterminateCheckError",
    "JointState",
    "LocalState",
    "MeasurementError",
    "Message",
    "MessageKind",
    "PairRecord",
    "Pauli",
    "Photon",
    "Pol",
    "PolBasis",
    "PolarizationPairState",
    "ProjectiveMeasurement",
    "ProtocolConfig",
    "RunReport",
    "SeededGenerator",
    "SourceAmplitudes",
    "StateError",
    "Transcript",
    "TransmissionRecord",
    "WcCheckResult",
    "apply_local",
    "apply_loss",
    "born_distribution",
    "classify",
    "codeword_bits",
    "codeword_to_encodings",
    "codeword_to_label",
    "convert_in_port",
    "decode",
    "decoy_check",
    "dep_basis",
    "device_measure",
    "device_outcome_distribution",
    "device_outcomes",
    "device_projective_measurement",
    "device_sample_counts",
    "encoding_choices",
    "encoding_to_label",
    "equal_up_to_global_phase",
    "insert_decoys",
    "ir_attack_decoy",
    "ir_attack_entangled",
    "label_to_codeword",
    "measure_projective",
    "measure_single",
    "mode_index",
    "partial_measure",
    "partner_encoding",
    "pol_freq_eigenstate",
    "polarization_frequency_basis",
    "port_of",
    "run_session",
    "source_state",
    "step1_prepare_and_encode",
    "tensor",
    "wavelength_convert_global",
    "wc_check",
]
