#include "w3sim/error.hpp"

namespace w3sim {

std::string_view to_string(Errc e) {
    switch (e) {
        case Errc::EmptySeed: return "EmptySeed";
        case Errc::MalformedKey: return "MalformedKey";
        case Errc::InvalidEncoding: return "InvalidEncoding";
        case Errc::Malformed: return "Malformed";
        case Errc::SenderKeyMismatch: return "SenderKeyMismatch";
        case Errc::DuplicateContract: return "DuplicateContract";
        case Errc::UnknownMethod: return "UnknownMethod";
        case Errc::NotMinted: return "NotMinted";
        case Errc::DuplicateTx: return "DuplicateTx";
        case Errc::PoolFull: return "PoolFull";
        case Errc::InlineTooLarge: return "InlineTooLarge";
        case Errc::InsufficientStorageNodes: return "InsufficientStorageNodes";
        case Errc::AllReplicasDown: return "AllReplicasDown";
        case Errc::NotFound: return "NotFound";
        case Errc::NotConnected: return "NotConnected";
        case Errc::UnregisteredUser: return "UnregisteredUser";
        case Errc::NoConfirmedState: return "NoConfirmedState";
        case Errc::CommitmentMismatch: return "CommitmentMismatch";
        case Errc::ScenarioInfeasible: return "ScenarioInfeasible";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::InvalidSignature: return "InvalidSignature";
    }
    return "Unknown";
}

}  // namespace w3sim
