#pragma once

#include "anonet/engine.hpp"

namespace anonet {

/// Detection of a 1 anywhere in the network: a node turns on once it holds
/// x = 1, is already on, or hears a 1, and from then on broadcasts 1.
/// Memory, output and messages start at 0 instead of the empty symbol.
struct Detection {
  using Input = int;
  using Memory = int;
  using Output = int;
  using Message = int;

  LocalOf<Detection> initial(const NodeContext<Input>& ctx) const {
    return {0, 0, std::vector<std::optional<Message>>(ctx.degree, 0)};
  }

  LocalOf<Detection> transition(const NodeContext<Input>& ctx, const Memory& z, const Output&,
                                std::span<const std::optional<Message>> in) const {
    bool on = ctx.x == 1 || z == 1;
    for (const auto& m : in) on = on || (m && *m == 1);
    const int v = on ? 1 : 0;
    return {v, v, std::vector<std::optional<Message>>(ctx.degree, v)};
  }
};

}  // namespace anonet
