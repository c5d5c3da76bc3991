from oblivion.protocol.agents import (
    HOMOMORPHIC_ROTATION,
    ORACLE_ROTATION,
    STRATEGIES,
    ServerAgent,
    UserAgent,
    error_class,
)
from oblivion.protocol.flows import (
    DeniedSentinel,
    Dropped,
    basic_run,
    basic_upload,
    distribute_eval_keys,
    exchange,
    mcsp_prb_update,
    mcsp_prb_upload,
    mcsp_run,
    mssp_run,
    mssp_upload,
    reencrypt_data,
    revoke_user,
    rotate_auth_key,
    upload,
)
from oblivion.protocol.messages import (
    FIELDS,
    OP_REQUEST,
    OP_RESPONSE,
    PRB_UPDATE,
    PRB_UPLOAD,
    PROTOCOLS,
    REENCRYPT_REQUEST,
    REKEY_ANNOUNCE,
    TAGS,
    UPLOAD_DATA,
    VERSION,
    Message,
    decode_message,
    encode_message,
    from_wire,
    to_wire,
)

__all__ = [
    "DeniedSentinel",
    "Dropped",
    "FIELDS",
    "HOMOMORPHIC_ROTATION",
    "Message",
    "OP_REQUEST",
    "OP_RESPONSE",
    "ORACLE_ROTATION",
    "PRB_UPDATE",
    "PRB_UPLOAD",
    "PROTOCOLS",
    "REENCRYPT_REQUEST",
    "REKEY_ANNOUNCE",
    "STRATEGIES",
    "ServerAgent",
    "TAGS",
    "UPLOAD_DATA",
    "UserAgent",
    "VERSION",
    "basic_run",
    "basic_upload",
    "decode_message",
    "distribute_eval_keys",
    "encode_message",
    "error_class",
    "exchange",
    "from_wire",
    "mcsp_prb_update",
    "mcsp_prb_upload",
    "mcsp_run",
    "mssp_run",
    "mssp_upload",
    "reencrypt_data",
    "revoke_user",
    "rotate_auth_key",
    "to_wire",
    "upload",
]
