/* Copyright 2026 The nucseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "nucseg/errors.hpp"

namespace nucseg {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return "InvalidArgument";
    case ErrorKind::kDimensionMismatch:
      return "DimensionMismatch";
    case ErrorKind::kParse:
      return "ParseError";
    case ErrorKind::kMissingInput:
      return "MissingInput";
    case ErrorKind::kIo:
      return "IoError";
    case ErrorKind::kNumeric:
      return "NumericError";
  }
  return "Unknown";
}

}  // namespace nucseg
