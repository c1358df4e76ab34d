//
// Copyright 2026 The advnlu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "advnlu/tensor/checkpoint.hpp"

#include <cstdint>
#include <algorithm>
#include <cstring>
#include <fstream>
#include <utility>

#include "advnlu/error.hpp"

namespace advnlu::tensor {
namespace {

constexpr char kMagic[8] = {'A', 'D', 'V', 'N', 'L', 'U', 'C', 'K'};
constexpr std::uint64_t kMaxRank = 8;

void WriteU64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void WriteU32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void WriteString(std::ostream& out, const std::string& s) {
  WriteU64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  void Bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      Fail(ErrorCode::kParse, "checkpoint " + path_ + " is truncated");
    }
  }
  std::uint64_t U64() {
    unsigned char buf[8];
    Bytes(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }
  std::uint32_t U32() {
    unsigned char buf[4];
    Bytes(reinterpret_cast<char*>(buf), 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }
  std::string String(std::uint64_t limit) {
    const std::uint64_t n = U64();
    if (n > limit) Fail(ErrorCode::kParse, "checkpoint " + path_ + " is corrupt");
    std::string s(n, '\0');
    Bytes(s.data(), n);
    return s;
  }

 private:
  std::istream& in_;
  std::string path_;
};

float DecodeFloat(const unsigned char* b) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | b[i];
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const std::string& config_json,
                    const ParamList<float>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  WriteU32(out, kCheckpointVersion);
  WriteString(out, config_json);
  WriteU64(out, params.size());
  for (const auto& [name, t] : params) {
    WriteString(out, name);
    WriteU64(out, t->rank());
    for (std::size_t d : t->shape()) WriteU64(out, d);
    for (float v : t->values()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      WriteU32(out, bits);
    }
  }
  if (!out) Fail(ErrorCode::kIo, "failed writing checkpoint " + path);
}

Checkpoint ReadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open checkpoint " + path);
  Reader r(in, path);
  char magic[8];
  r.Bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    Fail(ErrorCode::kParse, path + " is not an advnlu checkpoint");
  }
  Checkpoint ck;
  ck.version = r.U32();
  if (ck.version != kCheckpointVersion) {
    Fail(ErrorCode::kParse, "checkpoint " + path + " has unsupported version " +
                                std::to_string(ck.version));
  }
  ck.config_json = r.String(std::uint64_t{1} << 26);
  const std::uint64_t count = r.U64();
  if (count > (1u << 20)) Fail(ErrorCode::kParse, "checkpoint " + path + " is corrupt");
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedArray a;
    a.name = r.String(4096);
    const std::uint64_t rank = r.U64();
    if (rank == 0 || rank > kMaxRank) {
      Fail(ErrorCode::kParse, "checkpoint array '" + a.name + "' has bad rank");
    }
    std::uint64_t n = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      const std::uint64_t extent = r.U64();
      if (extent == 0 || extent > (std::uint64_t{1} << 32)) {
        Fail(ErrorCode::kParse, "checkpoint array '" + a.name + "' has bad shape");
      }
      a.shape.push_back(extent);
      n *= extent;
    }
    if (n > (std::uint64_t{1} << 32)) {
      Fail(ErrorCode::kParse, "checkpoint array '" + a.name + "' is too large");
    }
    std::vector<unsigned char> raw(n * 4);
    r.Bytes(reinterpret_cast<char*>(raw.data()), raw.size());
    a.values.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) a.values[i] = DecodeFloat(&raw[i * 4]);
    ck.arrays.push_back(std::move(a));
  }
  return ck;
}

void LoadCheckpointInto(const Checkpoint& checkpoint,
                        const ParamList<float>& params) {
  if (checkpoint.arrays.size() != params.size()) {
    Fail(ErrorCode::kDimension,
         "checkpoint holds " + std::to_string(checkpoint.arrays.size()) +
             " arrays but the model expects " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const NamedArray& a = checkpoint.arrays[k];
    Tensor<float>& t = *params[k].second;
    if (a.name != params[k].first) {
      Fail(ErrorCode::kDimension, "checkpoint array '" + a.name +
                                      "' found where '" + params[k].first +
                                      "' was expected");
    }
    if (a.shape != t.shape()) {
      Fail(ErrorCode::kDimension, "checkpoint array '" + a.name + "' has shape " +
                                      ShapeString(a.shape) + ", model expects " +
                                      ShapeString(t.shape()));
    }
    std::copy(a.values.begin(), a.values.end(), t.values().begin());
  }
}

}  // namespace advnlu::tensor
