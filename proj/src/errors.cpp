#include "syncurator/errors.hpp"

#include <cstdio>

namespace syncurator {

namespace {
std::string sparse_message(const std::string& component, double valid, double required) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: valid fraction %.4f below required %.4f",
                  component.c_str(), valid, required);
    return buf;
}
} // namespace

TooSparse::TooSparse(std::string component, double valid_fraction, double required)
    : Error(sparse_message(component, valid_fraction, required)),
      component_(std::move(component)),
      valid_fraction_(valid_fraction),
      required_(required) {}

InsufficientPairs::InsufficientPairs(std::string message, std::size_t edited_shortfall,
                                     std::size_t identical_shortfall)
    : Error(std::move(message)),
      edited_shortfall_(edited_shortfall),
      identical_shortfall_(identical_shortfall) {}

} // namespace syncurator
