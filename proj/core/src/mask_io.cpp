// SPDX-License-Identifier: Apache-2.0

#include "holov/mask_io.hpp"

#include <zlib.h>

#include <sstream>

#include "holov/tensor_io.hpp"

namespace holov {

namespace {

constexpr std::string_view kMagic = "HMASK1";

void check_record(const MaskRecord& rec) {
    if (rec.image_id.empty()) throw error("mask record needs an image id");
    for (char ch : rec.image_id)
        if (ch == ' ' || ch == '\n') throw error("invalid image id: " + rec.image_id);
    if (rec.method.empty() || rec.method.find(' ') != std::string::npos)
        throw error("invalid method tag");
    if (rec.grid_h * rec.grid_w != rec.n_v) throw error("grid mismatch");
    if (rec.retained.size() != rec.retain_count)
        throw error("retained index count does not match retain_count");
    for (std::size_t i = 0; i < rec.retained.size(); ++i) {
        if (rec.retained[i] >= rec.n_v) throw error("retained index out of range");
        if (i > 0 && rec.retained[i] <= rec.retained[i - 1])
            throw error("retained indices must be strictly increasing");
    }
}

}  // namespace

std::string encode_mask_file(const MaskFile& mf) {
    std::ostringstream out;
    out << kMagic << '\n';
    for (const MaskRecord& rec : mf.records) {
        check_record(rec);
        out << "image " << rec.image_id << ' ' << rec.n_v << ' ' << rec.grid_h << ' '
            << rec.grid_w << ' ' << rec.retain_count << ' ' << rec.method << ' '
            << rec.config_digest << '\n';
        out << "indices";
        for (std::size_t idx : rec.retained) out << ' ' << idx;
        out << '\n';
    }
    out << "end\n";
    return out.str();
}

MaskFile decode_mask_file(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw error("not a mask file (bad magic)");

    MaskFile mf;
    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        std::istringstream fields(line);
        std::string kind;
        fields >> kind;
        if (kind != "image") throw error("malformed mask line: " + line);

        MaskRecord rec;
        fields >> rec.image_id >> rec.n_v >> rec.grid_h >> rec.grid_w >> rec.retain_count >>
            rec.method >> rec.config_digest;
        if (fields.fail()) throw error("malformed mask line: " + line);

        if (!std::getline(in, line)) throw error("mask record missing indices line");
        std::istringstream idx_in(line);
        std::string tag;
        idx_in >> tag;
        if (tag != "indices") throw error("mask record missing indices line");
        std::size_t idx = 0;
        while (idx_in >> idx) rec.retained.push_back(idx);

        check_record(rec);
        mf.records.push_back(std::move(rec));
    }
    if (!saw_end) throw error("mask file missing end marker");
    return mf;
}

void save_mask_file(const std::filesystem::path& path, const MaskFile& mf) {
    const std::string text = encode_mask_file(mf);
    atomic_write_file(path, std::as_bytes(std::span(text.data(), text.size())));
}

MaskFile load_mask_file(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return decode_mask_file(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<std::byte> render_mask_pgm(const MaskRecord& rec, std::size_t grid_h,
                                       std::size_t grid_w) {
    if (grid_h * grid_w != rec.n_v) throw error("grid mismatch");

    const std::string header =
        "P5\n" + std::to_string(grid_w) + ' ' + std::to_string(grid_h) + "\n255\n";
    std::vector<std::byte> out;
    out.reserve(header.size() + rec.n_v);
    for (char ch : header) out.push_back(static_cast<std::byte>(ch));

    std::vector<std::byte> pixels(rec.n_v, std::byte{0});
    for (std::size_t idx : rec.retained) pixels[idx] = std::byte{255};
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

std::string config_digest(std::string_view canonical_config) {
    const std::uint32_t crc = static_cast<std::uint32_t>(
        ::crc32(0UL, reinterpret_cast<const Bytef*>(canonical_config.data()),
                static_cast<uInt>(canonical_config.size())));
    static const char digits[] = "0123456789abcdef";
    std::string out(8, '0');
    std::uint32_t v = crc;
    for (int i = 7; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

}  // namespace holov
