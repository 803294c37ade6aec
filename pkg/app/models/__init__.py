from app.models.content_encoder import ContentEncoder, ContentPosterior, sample_content
from app.models.decoder import Decoder
from app.models.domain_classifier import DomainClassifier
from app.models.layers import GradientReversal, grl
from app.models.speaker_encoder import SpeakerEncoder
from app.models.vc_model import ModelOutput, NoiseRobustVC

__all__ = [
    'ContentEncoder',
    'ContentPosterior',
    'sample_content',
    'Decoder',
    'DomainClassifier',
    'GradientReversal',
    'grl',
    'SpeakerEncoder',
    'ModelOutput',
    'NoiseRobustVC'
]
