#pragma once

#include "w3sim/bytes.hpp"

namespace w3sim {

/// The build's fixed 256-bit digest: SHA-256.
Digest digest(ByteView data);

/// Incremental form of digest().
class Hasher {
public:
    Hasher();
    ~Hasher();
    Hasher(const Hasher&) = delete;
    Hasher& operator=(const Hasher&) = delete;

    Hasher& update(ByteView data);
    Hasher& update(std::string_view s) {
        return update(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    }
    Digest finish();

private:
    void* ctx_;
};

}  // namespace w3sim
