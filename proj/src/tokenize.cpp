#include "oneshot/tokenize.hpp"

#include <algorithm>

#include "oneshot/error.hpp"

namespace oneshot {

namespace unicode {

std::vector<std::uint32_t> decode_utf8(const std::string& text) {
    std::vector<std::uint32_t> cps;
    cps.reserve(text.size());
    std::size_t i = 0;
    const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char b = bytes[i];
        std::uint32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b < 0x80) {
            cp = b;
        } else if ((b & 0xE0) == 0xC0 && i + 1 < n && (bytes[i + 1] & 0xC0) == 0x80) {
            cp = (static_cast<std::uint32_t>(b & 0x1F) << 6) | (bytes[i + 1] & 0x3F);
            len = 2;
            if (cp < 0x80) cp = 0xFFFD;  // overlong
        } else if ((b & 0xF0) == 0xE0 && i + 2 < n && (bytes[i + 1] & 0xC0) == 0x80 &&
                   (bytes[i + 2] & 0xC0) == 0x80) {
            cp = (static_cast<std::uint32_t>(b & 0x0F) << 12) |
                 (static_cast<std::uint32_t>(bytes[i + 1] & 0x3F) << 6) | (bytes[i + 2] & 0x3F);
            len = 3;
            if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
        } else if ((b & 0xF8) == 0xF0 && i + 3 < n && (bytes[i + 1] & 0xC0) == 0x80 &&
                   (bytes[i + 2] & 0xC0) == 0x80 && (bytes[i + 3] & 0xC0) == 0x80) {
            cp = (static_cast<std::uint32_t>(b & 0x07) << 18) |
                 (static_cast<std::uint32_t>(bytes[i + 1] & 0x3F) << 12) |
                 (static_cast<std::uint32_t>(bytes[i + 2] & 0x3F) << 6) | (bytes[i + 3] & 0x3F);
            len = 4;
            if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
        }
        cps.push_back(cp);
        i += len;
    }
    return cps;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace unicode

namespace {

bool is_space_cp(std::uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
        case 0x20: case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

std::uint32_t lower_cp(std::uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;  // Latin-1 letters
    if (cp == 0x178) return 0xFF;                                  // Y with diaeresis
    if (cp == 0x130) return 'i';                                   // dotted capital I
    if (cp >= 0x100 && cp <= 0x177 && (cp % 2) == 0) return cp + 1;  // Latin Extended-A pairs
    if (cp >= 0x179 && cp <= 0x17D && (cp % 2) == 1) return cp + 1;
    return cp;
}

// Lowercase accented Latin letter -> ASCII base letter. Ligatures and
// letters outside Latin-1 / Latin Extended-A pass through.
std::uint32_t strip_accent_cp(std::uint32_t cp) {
    if (cp >= 0xE0 && cp <= 0xE5) return 'a';
    if (cp == 0xE7) return 'c';
    if (cp >= 0xE8 && cp <= 0xEB) return 'e';
    if (cp >= 0xEC && cp <= 0xEF) return 'i';
    if (cp == 0xF1) return 'n';
    if ((cp >= 0xF2 && cp <= 0xF6) || cp == 0xF8) return 'o';
    if (cp >= 0xF9 && cp <= 0xFC) return 'u';
    if (cp == 0xFD || cp == 0xFF) return 'y';
    switch (cp) {
        case 0x101: case 0x103: case 0x105: return 'a';
        case 0x107: case 0x109: case 0x10B: case 0x10D: return 'c';
        case 0x10F: case 0x111: return 'd';
        case 0x113: case 0x115: case 0x117: case 0x119: case 0x11B: return 'e';
        case 0x11D: case 0x11F: case 0x121: case 0x123: return 'g';
        case 0x125: case 0x127: return 'h';
        case 0x129: case 0x12B: case 0x12D: case 0x12F: case 0x131: return 'i';
        case 0x135: return 'j';
        case 0x137: return 'k';
        case 0x13A: case 0x13C: case 0x13E: case 0x140: case 0x142: return 'l';
        case 0x144: case 0x146: case 0x148: return 'n';
        case 0x14D: case 0x14F: case 0x151: return 'o';
        case 0x155: case 0x157: case 0x159: return 'r';
        case 0x15B: case 0x15D: case 0x15F: case 0x161: return 's';
        case 0x163: case 0x165: case 0x167: return 't';
        case 0x169: case 0x16B: case 0x16D: case 0x16F: case 0x171: case 0x173: return 'u';
        case 0x175: return 'w';
        case 0x177: return 'y';
        case 0x17A: case 0x17C: case 0x17E: return 'z';
        default: return cp;
    }
}

std::vector<std::uint32_t> normalize_cps(const std::string& text, const NormConfig& cfg) {
    std::vector<std::uint32_t> cps = unicode::decode_utf8(text);
    std::vector<std::uint32_t> out;
    out.reserve(cps.size());
    for (std::uint32_t cp : cps) {
        if (cfg.lowercase) cp = lower_cp(cp);
        if (cfg.strip_accents) cp = strip_accent_cp(cp);
        if (cfg.collapse_whitespace && is_space_cp(cp)) {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
        } else {
            out.push_back(cp);
        }
    }
    if (cfg.collapse_whitespace && !out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

// ASCII alphanumerics are token characters; above ASCII everything counts
// except whitespace and the common punctuation blocks.
bool is_token_cp(std::uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (is_space_cp(cp)) return false;
    if (cp >= 0xA1 && cp <= 0xBF) return false;  // Latin-1 punctuation and symbols
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    return true;
}

}  // namespace

std::string normalize(const std::string& text, const NormConfig& cfg) {
    std::string out;
    for (std::uint32_t cp : normalize_cps(text, cfg)) unicode::append_utf8(out, cp);
    return out;
}

std::vector<std::string> word_tokenize(const std::string& text, const NormConfig& cfg) {
    const std::vector<std::uint32_t> cps = normalize_cps(text, cfg);
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < cps.size()) {
        if (!is_token_cp(cps[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < cps.size() && is_token_cp(cps[i])) ++i;
        if (i - start >= 2) {  // single-character tokens dropped
            std::string token;
            for (std::size_t k = start; k < i; ++k) unicode::append_utf8(token, cps[k]);
            tokens.push_back(std::move(token));
        }
    }
    return tokens;
}

std::vector<std::string> char_ngrams(const std::string& text, int n_min, int n_max,
                                     const NormConfig& cfg) {
    if (n_min < 1 || n_min > n_max || n_max > 8) {
        throw Error("char_ngrams: invalid n range [" + std::to_string(n_min) + ", " +
                    std::to_string(n_max) + "], need 1 <= n_min <= n_max <= 8");
    }
    const std::vector<std::uint32_t> cps = normalize_cps(text, cfg);
    const auto len = static_cast<long>(cps.size());
    std::vector<std::string> grams;
    for (int n = n_min; n <= n_max; ++n) {
        for (long start = 0; start + n <= len; ++start) {
            std::string gram;
            for (long k = start; k < start + n; ++k) unicode::append_utf8(gram, cps[k]);
            grams.push_back(std::move(gram));
        }
    }
    return grams;
}

}  // namespace oneshot
