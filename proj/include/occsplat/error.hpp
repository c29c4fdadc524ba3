// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_ERROR_HPP
#define OCCSPLAT_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace occsplat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed OCCG file. Carries the byte offset where decoding failed.
class FormatError : public Error {
  public:
    FormatError(const std::string &what, std::uint64_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t
    offset() const noexcept {
        return offset_;
    }

  private:
    std::uint64_t offset_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

/// Inputs that disagree on dims, class count or image size.
class GeometryError : public Error {
  public:
    using Error::Error;
};

/// Bad arguments: out-of-range indices, wrong payload kind, bad config.
class ArgumentError : public Error {
  public:
    using Error::Error;
};

} // namespace occsplat

#endif // OCCSPLAT_ERROR_HPP
