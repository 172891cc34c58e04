#include "lms/rational.hpp"

#include "lms/errors.hpp"

#include <cctype>

namespace lms {

Rational parse_rational(const std::string& text) {
    auto fail = [&]() -> Rational { throw InputError("cannot parse rational '" + text + "'"); };
    if (text.empty()) return fail();
    auto slash = text.find('/');
    auto digits = [](const std::string& s, bool allow_sign) {
        if (s.empty()) return false;
        size_t i = (allow_sign && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    if (slash != std::string::npos) {
        std::string n = text.substr(0, slash), d = text.substr(slash + 1);
        if (!digits(n, true) || !digits(d, false)) return fail();
        BigInt den(d);
        if (den == 0) return fail();
        return Rational(BigInt(n), den);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) {
        if (!digits(text, true)) return fail();
        return Rational(BigInt(text));
    }
    std::string ip = text.substr(0, dot), fp = text.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) ip = ip.substr(1);
    if (ip.empty()) ip = "0";
    if (!digits(ip, false) || (!fp.empty() && !digits(fp, false))) return fail();
    BigInt scale = ipow(BigInt(10), static_cast<unsigned>(fp.size()));
    Rational r(BigInt(ip) * scale + (fp.empty() ? BigInt(0) : BigInt(fp)), scale);
    return neg ? -r : r;
}

}  // namespace lms
