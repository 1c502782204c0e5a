"""
Echo Decoding Package

Gaussian message passing that separates the communication signal from the
delayed imaging echo and decides the QPSK symbols, iterating with an imager.
"""

from .messages import (
    ScalarGaussian, SymbolBelief, MatchedMoments, moment_match, belief_and_decide,
    fwd_msg_pure_comm, fwd_msg_overlap, bwd_msg_tail, bwd_msg_mid,
)
from .decoder import (
    Imager, DecoderState, DecoderResult, EchoDecoder, comm_scalar, run_decoder, detect_ignoring_echo,
)
from .frame_io import save_received_csv, load_received_csv, save_decisions_csv

__all__ = [
    'ScalarGaussian', 'SymbolBelief', 'MatchedMoments', 'moment_match', 'belief_and_decide',
    'fwd_msg_pure_comm', 'fwd_msg_overlap', 'bwd_msg_tail', 'bwd_msg_mid',
    'Imager', 'DecoderState', 'DecoderResult', 'EchoDecoder', 'comm_scalar', 'run_decoder',
    'detect_ignoring_echo',
    'save_received_csv', 'load_received_csv', 'save_decisions_csv',
]
