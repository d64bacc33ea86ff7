#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace w3sim {

enum class Errc {
    EmptySeed,
    MalformedKey,
    InvalidEncoding,
    Malformed,
    SenderKeyMismatch,
    DuplicateContract,
    UnknownMethod,
    NotMinted,
    DuplicateTx,
    PoolFull,
    InlineTooLarge,
    InsufficientStorageNodes,
    AllReplicasDown,
    NotFound,
    NotConnected,
    UnregisteredUser,
    NoConfirmedState,
    CommitmentMismatch,
    ScenarioInfeasible,
    InvalidConfig,
    InvalidSignature,
};

std::string_view to_string(Errc e);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    explicit Error(Errc code) : Error(code, std::string(to_string(code))) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace w3sim
