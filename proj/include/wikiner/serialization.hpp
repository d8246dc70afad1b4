// Copyright 2026 The Wikiner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WIKINER_SERIALIZATION_HPP
#define WIKINER_SERIALIZATION_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <cereal/archives/binary.hpp>
#include <cereal/types/array.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/set.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/unordered_map.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/vector.hpp>

#include <wikiner/common.hpp>

namespace cereal
{

template <class Archive, int R, int C, int O, int MR, int MC>
void save(Archive &ar, const Eigen::Matrix<double, R, C, O, MR, MC> &m)
{
    std::int64_t rows = m.rows(), cols = m.cols();
    std::vector<double> data(m.data(), m.data() + m.size());
    ar(rows, cols, data);
}

template <class Archive, int R, int C, int O, int MR, int MC>
void load(Archive &ar, Eigen::Matrix<double, R, C, O, MR, MC> &m)
{
    std::int64_t rows = 0, cols = 0;
    std::vector<double> data;
    ar(rows, cols, data);
    if (static_cast<std::int64_t>(data.size()) != rows * cols) {
        throw wikiner::Error("corrupt matrix in archive");
    }
    m.resize(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
}

} // namespace cereal

namespace wikiner
{

// Binary files start with an 8-byte magic, a 4-byte format version and a
// kind tag naming the payload, followed by a cereal binary archive.
inline constexpr std::array<char, 8> kMagic = {'W', 'I', 'K', 'I', 'N', 'E', 'R', '\x01'};

template <typename T>
void save_binary(const std::string &path, const std::string &kind, std::uint32_t version, const T &payload)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out.write(kMagic.data(), kMagic.size());
    cereal::BinaryOutputArchive ar(out);
    ar(version, kind, payload);
    if (!out) {
        throw Error("failed writing " + path);
    }
}

template <typename T>
T load_binary(const std::string &path, const std::string &kind, std::uint32_t version)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw Error(path + ": not a wikiner binary file");
    }
    cereal::BinaryInputArchive ar(in);
    std::uint32_t got_version = 0;
    std::string got_kind;
    try {
        ar(got_version, got_kind);
    } catch (const cereal::Exception &e) {
        throw Error(path + ": truncated header");
    }
    if (got_kind != kind) {
        throw Error(path + ": expected a " + kind + " file, found " + got_kind);
    }
    if (got_version != version) {
        throw Error(path + ": unsupported " + kind + " version " + std::to_string(got_version));
    }
    T payload;
    try {
        ar(payload);
    } catch (const cereal::Exception &e) {
        throw Error(path + ": corrupt payload: " + e.what());
    }
    return payload;
}

} // namespace wikiner

#endif
