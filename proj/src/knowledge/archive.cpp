#include "reqsolve/errors.hpp"
#include "reqsolve/knowledge.hpp"

#include <cstring>
#include <fstream>

#include <spdlog/spdlog.h>
#include <zlib.h>

namespace reqsolve {

namespace {

bool wanted(const std::string& name) {
    return name.ends_with(".py") || name.ends_with(".pyi");
}

// Relative, normalized path inside the archive or nullopt if it escapes.
std::optional<fs::path> safe_relative(const std::string& name) {
    fs::path p(name);
    if (p.is_absolute() || name.empty()) return std::nullopt;
    fs::path out;
    for (const auto& part : p) {
        const auto s = part.string();
        if (s == "..") return std::nullopt;
        if (s == "." || s.empty()) continue;
        out /= part;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

void store(const fs::path& dest, const std::string& name, const char* data, std::size_t size) {
    if (!wanted(name)) return;
    auto rel = safe_relative(name);
    if (!rel) {
        spdlog::warn("archive entry '{}' escapes the extraction directory; skipped", name);
        return;
    }
    const auto target = dest / *rel;
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary);
    out.write(data, static_cast<std::streamsize>(size));
}

std::string read_gzip_or_plain(const fs::path& archive) {
    gzFile f = gzopen(archive.string().c_str(), "rb");
    if (!f) throw SourceUnavailable("cannot open archive " + archive.string());
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
    const bool failed = n < 0;
    gzclose(f);
    if (failed) throw SourceUnavailable("corrupt compressed archive " + archive.string());
    return out;
}

std::uint64_t octal(const char* p, std::size_t n) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n && p[i]; ++i) {
        if (p[i] == ' ') continue;
        if (p[i] < '0' || p[i] > '7') break;
        v = v * 8 + static_cast<std::uint64_t>(p[i] - '0');
    }
    return v;
}

std::string field(const char* p, std::size_t n) { return std::string(p, strnlen(p, n)); }

void extract_tar(const std::string& data, const fs::path& dest) {
    std::size_t pos = 0;
    std::string long_name;
    while (pos + 512 <= data.size()) {
        const char* h = data.data() + pos;
        if (std::all_of(h, h + 512, [](char c) { return c == 0; })) break;
        const auto size = octal(h + 124, 12);
        const char type = h[156];
        std::string name = field(h, 100);
        if (std::memcmp(h + 257, "ustar", 5) == 0) {
            const auto prefix = field(h + 345, 155);
            if (!prefix.empty()) name = prefix + "/" + name;
        }
        const auto body = pos + 512;
        if (body + size > data.size()) throw SourceUnavailable("truncated tar archive");
        if (type == 'L') {
            long_name = field(data.data() + body, size);
        } else if (type == 'x') {
            // PAX records: "<len> key=value\n"
            std::string_view recs(data.data() + body, size);
            while (!recs.empty()) {
                const auto sp = recs.find(' ');
                if (sp == std::string_view::npos) break;
                const auto len = std::stoul(std::string(recs.substr(0, sp)));
                if (len == 0 || len > recs.size()) break;
                auto rec = recs.substr(sp + 1, len - sp - 2);
                if (rec.starts_with("path=")) long_name = std::string(rec.substr(5));
                recs.remove_prefix(len);
            }
        } else {
            if (!long_name.empty()) {
                name = long_name;
                long_name.clear();
            }
            if (type == '0' || type == '\0' || type == '7') store(dest, name, data.data() + body, size);
        }
        pos = body + (size + 511) / 512 * 512;
    }
}

std::uint32_t le32(const unsigned char* p) { return p[0] | p[1] << 8 | p[2] << 16 | static_cast<std::uint32_t>(p[3]) << 24; }
std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | p[1] << 8); }

std::string inflate_raw(const unsigned char* src, std::size_t n, std::size_t expected) {
    std::string out(expected, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw SourceUnavailable("zlib init failed");
    zs.next_in = const_cast<unsigned char*>(src);
    zs.avail_in = static_cast<uInt>(n);
    zs.next_out = reinterpret_cast<unsigned char*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw SourceUnavailable("corrupt zip entry");
    out.resize(zs.total_out);
    return out;
}

void extract_zip(const fs::path& archive, const fs::path& dest) {
    std::ifstream in(archive, std::ios::binary);
    if (!in) throw SourceUnavailable("cannot open archive " + archive.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* d = reinterpret_cast<const unsigned char*>(buf.data());
    const std::size_t n = buf.size();
    if (n < 22) throw SourceUnavailable("not a zip archive: " + archive.string());

    std::size_t eocd = n - 22;
    while (true) {
        if (le32(d + eocd) == 0x06054b50) break;
        if (eocd == 0 || n - eocd > 22 + 0xFFFF) throw SourceUnavailable("zip directory not found in " + archive.string());
        --eocd;
    }
    const std::size_t count = le16(d + eocd + 10);
    std::size_t cd = le32(d + eocd + 16);
    for (std::size_t i = 0; i < count; ++i) {
        if (cd + 46 > n || le32(d + cd) != 0x02014b50) throw SourceUnavailable("corrupt zip directory");
        const auto method = le16(d + cd + 10);
        const std::size_t csize = le32(d + cd + 20);
        const std::size_t usize = le32(d + cd + 24);
        const std::size_t name_len = le16(d + cd + 28);
        const std::size_t extra_len = le16(d + cd + 30);
        const std::size_t comment_len = le16(d + cd + 32);
        const std::size_t local = le32(d + cd + 42);
        const std::string name(buf.data() + cd + 46, name_len);
        cd += 46 + name_len + extra_len + comment_len;

        if (!wanted(name)) continue;
        if (local + 30 > n || le32(d + local) != 0x04034b50) throw SourceUnavailable("corrupt zip entry header");
        const std::size_t data_at = local + 30 + le16(d + local + 26) + le16(d + local + 28);
        if (data_at + csize > n) throw SourceUnavailable("truncated zip entry");
        if (method == 0) {
            store(dest, name, buf.data() + data_at, csize);
        } else if (method == 8) {
            const auto content = inflate_raw(d + data_at, csize, usize);
            store(dest, name, content.data(), content.size());
        } else {
            spdlog::warn("zip entry '{}' uses unsupported compression {}; skipped", name, method);
        }
    }
}

}  // namespace

void extract_python_sources(const fs::path& archive, const fs::path& dest) {
    const auto name = archive.filename().string();
    fs::create_directories(dest);
    if (name.ends_with(".zip") || name.ends_with(".whl")) {
        extract_zip(archive, dest);
    } else if (name.ends_with(".tar.gz") || name.ends_with(".tgz") || name.ends_with(".tar")) {
        extract_tar(read_gzip_or_plain(archive), dest);
    } else {
        throw SourceUnavailable("unsupported archive format: " + name);
    }
}

}  // namespace reqsolve
