#include "aupipe/core.hpp"

namespace aupipe {

AuId AuId::from_number(int number) {
  for (std::size_t i = 0; i < kAuNumbers.size(); ++i) {
    if (kAuNumbers[i] == number) return AuId(number, static_cast<int>(i));
  }
  throw DomainError("AU" + std::to_string(number) + " is not one of the 12 DISFA action units");
}

const std::array<AuId, kAuCount>& AuId::all() {
  static const std::array<AuId, kAuCount> ids = [] {
    std::array<AuId, kAuCount> out = {
        AuId(1, 0),  AuId(2, 1),   AuId(4, 2),   AuId(5, 3),   AuId(6, 4),   AuId(9, 5),
        AuId(12, 6), AuId(15, 7),  AuId(17, 8),  AuId(20, 9),  AuId(25, 10), AuId(26, 11)};
    return out;
  }();
  return ids;
}

}  // namespace aupipe
