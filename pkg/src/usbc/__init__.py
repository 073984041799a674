"""Link-level simulation and BER analysis of ultrasonic backscatter to implanted tags."""
from .channel import (
    KIDNEY_PHANTOM,
    AttenuationParams,
    ChannelRealization,
    FadingModel,
    MultipathProfile,
    NakagamiParams,
    attenuate,
    build_cir,
    sample_channel_realization,
    sample_nakagami,
)
from .codebook import (
    Codebook,
    ReaderCode,
    build_codebook,
    demap_codeword,
    frames_for_bits,
    generate_reader_code,
    map_bits,
)
from .errors import CodebookSizeError, ConfigError, LengthMismatchError, QuadratureError, UsbcError
from .harness import BerCurve, SimConfig, derive_substream, run_ber_vs_k, run_ber_vs_snr
from .receiver import Detection, detect, energy_detect, match_and_aggregate
from .tagphy import (
    DelayC,
    FrameGrid,
    MatchA,
    Off,
    Pulse,
    ShortB,
    assemble_interrogation,
    make_monocycle,
    reflection_coefficient,
    switch_response,
    synthesize_received,
)
from .theory import (
    TheoryParams,
    ber_conditional,
    ber_faded,
    ber_from_pcorrect,
    ber_theoretical,
    db_to_linear,
    p_correct_conditional,
    q_function,
    statistic_oracle,
)

__version__ = "0.1.0"
