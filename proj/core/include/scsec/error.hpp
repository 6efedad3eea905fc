#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scsec {

enum class Errc {
    not_confirmed,
    unknown_state,
    unknown_player,
    unknown_instance,
    unknown_opcode,
    unknown_id,
    tree_full,
    configuration,
    io,
};

std::string_view errc_name(Errc e);

/// Thrown for precondition violations named by the operation contracts.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace scsec
