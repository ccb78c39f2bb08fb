// SPDX-License-Identifier: Apache-2.0

#include "holov/tensor_io.hpp"

#include <zlib.h>

#include "holov/core_model.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace holov {

namespace {

constexpr std::string_view kMagic = "HTC1";

std::uint32_t crc_of(std::span<const std::byte> bytes) {
    return static_cast<std::uint32_t>(
        ::crc32(0UL, reinterpret_cast<const Bytef*>(bytes.data()),
                static_cast<uInt>(bytes.size())));
}

void append_f32_le(std::vector<std::byte>& out, float value) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
    out.push_back(static_cast<std::byte>(bits & 0xFF));
    out.push_back(static_cast<std::byte>((bits >> 8) & 0xFF));
    out.push_back(static_cast<std::byte>((bits >> 16) & 0xFF));
    out.push_back(static_cast<std::byte>((bits >> 24) & 0xFF));
}

float read_f32_le(std::span<const std::byte> bytes, std::size_t offset) {
    std::uint32_t bits = 0;
    bits |= static_cast<std::uint32_t>(bytes[offset]);
    bits |= static_cast<std::uint32_t>(bytes[offset + 1]) << 8;
    bits |= static_cast<std::uint32_t>(bytes[offset + 2]) << 16;
    bits |= static_cast<std::uint32_t>(bytes[offset + 3]) << 24;
    return std::bit_cast<float>(bits);
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string out;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += 'x';
        out += std::to_string(shape[i]);
    }
    return out;
}

std::vector<std::size_t> parse_shape(const std::string& text) {
    std::vector<std::size_t> shape;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find('x', pos);
        if (next == std::string::npos) next = text.size();
        const std::string part = text.substr(pos, next - pos);
        if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
            throw error("malformed shape in manifest");
        shape.push_back(std::stoull(part));
        pos = next + 1;
    }
    if (shape.empty()) throw error("malformed shape in manifest");
    return shape;
}

std::uint32_t parse_crc(const std::string& text) {
    if (text.size() != 8 || text.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw error("malformed checksum in manifest");
    return static_cast<std::uint32_t>(std::stoul(text, nullptr, 16));
}

std::string hex8(std::uint32_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string out(8, '0');
    for (int i = 7; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

void check_group_name(const std::string& name) {
    if (name.empty()) throw error("group name must be non-empty");
    for (char ch : name)
        if (ch == ' ' || ch == '.' || ch == '\n') throw error("invalid group name: " + name);
}

void append_serialized(std::vector<std::byte>& payload, std::span<const float> values) {
    payload.reserve(payload.size() + values.size() * 4);
    for (float v : values) append_f32_le(payload, v);
}

}  // namespace

std::vector<std::byte> encode_token_sets(const std::vector<NamedTokenSet>& sets) {
    std::vector<NamedTokenSet> ordered = sets;
    std::sort(ordered.begin(), ordered.end(),
              [](const NamedTokenSet& a, const NamedTokenSet& b) { return a.first < b.first; });

    std::ostringstream manifest;
    manifest << kMagic << '\n';
    std::vector<std::byte> payload;

    std::vector<std::string> tensor_lines;
    for (const auto& [group, ts] : ordered) {
        check_group_name(group);
        manifest << "meta " << group << " grid " << ts.grid_h << ' ' << ts.grid_w << ' '
                 << (ts.normalized ? 1 : 0) << '\n';

        const auto emit = [&](const std::string& name, const std::vector<std::size_t>& shape,
                              std::span<const float> values) {
            const std::size_t offset = payload.size();
            append_serialized(payload, values);
            const std::size_t length = payload.size() - offset;
            const std::uint32_t crc =
                crc_of(std::span<const std::byte>(payload.data() + offset, length));
            tensor_lines.push_back("tensor " + name + " f32 " + shape_string(shape) + ' ' +
                                   std::to_string(offset) + ' ' + std::to_string(length) + ' ' +
                                   hex8(crc));
        };
        emit(group + ".embeddings", {ts.embeddings.rows, ts.embeddings.cols},
             ts.embeddings.data);
        emit(group + ".attention", {ts.attention.size()}, ts.attention);
    }

    for (const auto& line : tensor_lines) manifest << line << '\n';
    manifest << "end\n";

    const std::string header = manifest.str();
    std::vector<std::byte> out;
    out.reserve(header.size() + payload.size());
    for (char ch : header) out.push_back(static_cast<std::byte>(ch));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::vector<NamedTokenSet> decode_token_sets(std::span<const std::byte> bytes) {
    // Split the text manifest from the binary payload at the "end" line.
    std::string text;
    std::size_t payload_start = 0;
    {
        std::string line;
        std::size_t pos = 0;
        while (pos < bytes.size()) {
            const char ch = static_cast<char>(bytes[pos]);
            ++pos;
            if (ch == '\n') {
                text += line;
                text += '\n';
                if (line == "end") {
                    payload_start = pos;
                    break;
                }
                line.clear();
            } else {
                line += ch;
                if (line.size() > 1 << 20) throw error("manifest line too long");
            }
        }
        if (payload_start == 0) throw error("manifest missing end marker");
    }
    const std::span<const std::byte> payload = bytes.subspan(payload_start);

    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw error("not a tensor container (bad magic)");

    struct Group {
        GroupMeta meta;
        bool has_meta = false;
        std::optional<TensorEntry> embeddings;
        std::optional<TensorEntry> attention;
    };
    std::vector<std::string> group_order;
    std::vector<Group> groups;
    const auto group_ref = [&](const std::string& name) -> Group& {
        for (std::size_t i = 0; i < group_order.size(); ++i)
            if (group_order[i] == name) return groups[i];
        group_order.push_back(name);
        groups.emplace_back();
        groups.back().meta.group = name;
        return groups.back();
    };

    while (std::getline(in, line)) {
        if (line == "end") break;
        std::istringstream fields(line);
        std::string kind;
        fields >> kind;
        if (kind == "meta") {
            std::string group, key;
            GroupMeta meta;
            int normalized = 0;
            fields >> group >> key >> meta.grid_h >> meta.grid_w >> normalized;
            if (fields.fail() || key != "grid") throw error("malformed manifest line: " + line);
            meta.group = group;
            meta.normalized = normalized != 0;
            Group& g = group_ref(group);
            g.meta = meta;
            g.has_meta = true;
        } else if (kind == "tensor") {
            TensorEntry entry;
            std::string dtype, shape_text, crc_text;
            fields >> entry.name >> dtype >> shape_text >> entry.offset >> entry.length >>
                crc_text;
            if (fields.fail() || dtype != "f32")
                throw error("malformed manifest line: " + line);
            entry.shape = parse_shape(shape_text);
            entry.crc32 = parse_crc(crc_text);

            const std::size_t dotpos = entry.name.rfind('.');
            if (dotpos == std::string::npos)
                throw error("tensor name missing group prefix: " + entry.name);
            const std::string group = entry.name.substr(0, dotpos);
            const std::string field = entry.name.substr(dotpos + 1);
            Group& g = group_ref(group);
            if (field == "embeddings") g.embeddings = entry;
            else if (field == "attention") g.attention = entry;
            else throw error("unknown tensor kind: " + entry.name);
        } else {
            throw error("malformed manifest line: " + line);
        }
    }

    const auto materialize = [&](const TensorEntry& entry) -> std::vector<float> {
        if (entry.offset + entry.length > payload.size())
            throw error("tensor " + entry.name + " exceeds payload");
        std::size_t count = 1;
        for (std::size_t dim : entry.shape) count *= dim;
        if (entry.length != count * 4) throw error("shape mismatch for tensor " + entry.name);
        const auto view = payload.subspan(entry.offset, entry.length);
        if (crc_of(view) != entry.crc32)
            throw error("checksum mismatch for tensor " + entry.name);
        std::vector<float> values(count);
        for (std::size_t i = 0; i < count; ++i) values[i] = read_f32_le(view, i * 4);
        return values;
    };

    std::vector<NamedTokenSet> out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const Group& g = groups[i];
        const std::string& name = group_order[i];
        if (!g.embeddings) throw error("missing tensor " + name + ".embeddings");
        if (!g.attention) throw error("missing tensor " + name + ".attention");
        if (!g.has_meta) throw error("missing grid metadata for group " + name);
        if (g.embeddings->shape.size() != 2)
            throw error("shape mismatch for tensor " + name + ".embeddings");
        if (g.attention->shape.size() != 1)
            throw error("shape mismatch for tensor " + name + ".attention");
        if (g.embeddings->shape[0] != g.attention->shape[0])
            throw error("shape mismatch for tensor " + name + ".attention");

        TokenSet ts;
        ts.embeddings.rows = g.embeddings->shape[0];
        ts.embeddings.cols = g.embeddings->shape[1];
        ts.embeddings.data = materialize(*g.embeddings);
        ts.attention = materialize(*g.attention);
        ts.grid_h = g.meta.grid_h;
        ts.grid_w = g.meta.grid_w;
        ts.normalized = g.meta.normalized;
        out.emplace_back(name, std::move(ts));
    }
    return out;
}

void save_token_sets(const std::filesystem::path& path, const std::vector<NamedTokenSet>& sets) {
    atomic_write_file(path, encode_token_sets(sets));
}

std::vector<NamedTokenSet> load_tensors(const std::filesystem::path& path) {
    auto sets = decode_token_sets(read_file(path));
    for (const auto& [name, ts] : sets) {
        const ValidationReport report = validate_token_set(ts);
        if (!report.ok())
            throw error("invalid token set " + name + ": " + report.violations.front());
    }
    return sets;
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open file: " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> out(buf.size());
    std::memcpy(out.data(), buf.data(), buf.size());
    return out;
}

void atomic_write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot open file for writing: " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace holov
