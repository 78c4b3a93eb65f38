// include/spkadapt/text_io.h

// Copyright 2026  spkadapt authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Small helpers shared by the text file readers and writers.

#ifndef SPKADAPT_TEXT_IO_H_
#define SPKADAPT_TEXT_IO_H_

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace spkadapt {

/// Shortest decimal form that parses back to the identical double.
std::string FormatDouble(double v);
/// Fixed-point with `decimals` digits, e.g. FormatFixed(1.0/3, 6) == "0.333333".
std::string FormatFixed(double v, int decimals);

/// Strict parse of the whole token; throws std::runtime_error naming `what`.
double ParseDouble(std::string_view token, std::string_view what);
long long ParseInt(std::string_view token, std::string_view what);

/// Splits on runs of spaces and tabs.
std::vector<std::string_view> SplitFields(std::string_view line);
std::vector<std::string_view> SplitOn(std::string_view line, char sep);

/// Open for reading/writing or throw std::runtime_error naming the path.
std::ifstream OpenInput(const std::string &path);
std::ofstream OpenOutput(const std::string &path);

}  // namespace spkadapt

#endif  // SPKADAPT_TEXT_IO_H_
