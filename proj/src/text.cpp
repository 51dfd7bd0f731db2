#include "hoprag/text.hpp"

#include <cctype>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace hoprag::text {

namespace {

constexpr UChar32 kInvalid = -1;

// Decodes the code point at `i`, advancing `i`. Invalid bytes yield kInvalid.
UChar32 next_code_point(std::string_view s, std::size_t& i) {
    UChar32 c = 0;
    auto pos = static_cast<int32_t>(i);
    U8_NEXT(s.data(), pos, static_cast<int32_t>(s.size()), c);
    i = static_cast<std::size_t>(pos);
    return c < 0 ? kInvalid : c;
}

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool error = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, c, error);
    if (!error) out.append(buf, static_cast<std::size_t>(len));
}

bool is_space(UChar32 c) { return c != kInvalid && u_isUWhiteSpace(c); }

bool is_term_char(UChar32 c) {
    if (c == kInvalid) return false;
    return u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

UChar32 fold(UChar32 c) { return u_foldCase(c, U_FOLD_CASE_DEFAULT); }

} // namespace

std::string case_fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        std::size_t start = i;
        UChar32 c = next_code_point(s, i);
        if (c == kInvalid)
            out.append(s.substr(start, i - start));
        else
            append_utf8(out, fold(c));
    }
    return out;
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t start = i;
        UChar32 c = next_code_point(s, i);
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.append(s.substr(start, i - start));
    }
    return out;
}

std::string entity_key(std::string_view s) { return normalize_whitespace(case_fold(s)); }

std::string trim(std::string_view s) {
    std::size_t first = s.size();
    std::size_t last = 0;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t start = i;
        UChar32 c = next_code_point(s, i);
        if (!is_space(c)) {
            if (first == s.size()) first = start;
            last = i;
        }
    }
    if (first == s.size()) return {};
    return std::string(s.substr(first, last - first));
}

std::string strip_punctuation(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        std::size_t start = i;
        UChar32 c = next_code_point(s, i);
        if (c != kInvalid && c < 0x80 && std::ispunct(static_cast<unsigned char>(c))) continue;
        if (c != kInvalid && u_ispunct(c)) continue;
        out.append(s.substr(start, i - start));
    }
    return out;
}

std::vector<std::string> alnum_terms(std::string_view s) {
    std::vector<std::string> terms;
    std::string current;
    for (std::size_t i = 0; i < s.size();) {
        UChar32 c = next_code_point(s, i);
        if (is_term_char(c)) {
            append_utf8(current, fold(c));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

FoldedText fold_with_offsets(std::string_view s) {
    FoldedText out;
    out.folded.reserve(s.size());
    auto emit = [&out](std::string_view bytes, std::size_t from, std::size_t to) {
        out.folded.append(bytes);
        out.origin.insert(out.origin.end(), bytes.size(), from);
        out.origin_end.insert(out.origin_end.end(), bytes.size(), to);
    };

    for (std::size_t i = 0; i < s.size();) {
        std::size_t start = i;
        UChar32 c = next_code_point(s, i);
        if (is_space(c)) {
            std::size_t run_end = i;
            for (std::size_t j = i; j < s.size();) {
                if (!is_space(next_code_point(s, j))) break;
                run_end = j;
            }
            i = run_end;
            emit(" ", start, run_end);
            continue;
        }
        if (c == kInvalid) {
            emit(s.substr(start, i - start), start, i);
            continue;
        }
        std::string folded;
        append_utf8(folded, fold(c));
        emit(folded, start, i);
    }
    return out;
}

} // namespace hoprag::text
