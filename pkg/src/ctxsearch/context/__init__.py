from ctxsearch.context.types import ContextFeature, PersonEmbedding
from ctxsearch.context.encoder import ContextEncoder, gsc_encode, lgc_encode, neighbor_max
from ctxsearch.context.attention import ChannelGate, se_attention
from ctxsearch.context.nae import NormAwareEmbedding, nae_embed
from ctxsearch.context.fusion import (
    ExplicitFusionHead,
    ImplicitFusionHead,
    build_fusion_head,
    embedding_dim,
)

__all__ = [
    "ContextFeature",
    "PersonEmbedding",
    "ContextEncoder",
    "gsc_encode",
    "lgc_encode",
    "neighbor_max",
    "ChannelGate",
    "se_attention",
    "NormAwareEmbedding",
    "nae_embed",
    "ExplicitFusionHead",
    "ImplicitFusionHead",
    "build_fusion_head",
    "embedding_dim",
]
