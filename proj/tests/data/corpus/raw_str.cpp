#include <regex>
#include <string>

const char* kJsonTemplate = R"({
    "name": "{}",
    "ok": true
})";

std::string make_record(const std::string& name) {
    std::string out = R"({"name": ")";
    out += name;
    out += R"(", "ok": true})";
    return out;
}

bool looks_like_ipv4(const std::string& s) {
    static const std::regex re(R"(^(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})$)");
    return std::regex_match(s, re);
}

std::string brace_wrap(const std::string& inner) {
    return "{" + inner + "}";
}
