#include "ergsyn/rng.hpp"

#include <sstream>

namespace ergsyn {

std::string Rng::state_string() const {
    std::ostringstream os;
    os << eng_;
    if (has_spare_) os << " 1 " << std::hexfloat << spare_;
    else os << " 0 0x0p+0";
    return os.str();
}

void Rng::set_state_string(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    int flag = 0;
    std::string spare_hex;
    is >> flag >> spare_hex;
    spare_ = spare_hex.empty() ? 0.0 : std::strtod(spare_hex.c_str(), nullptr);
    has_spare_ = (flag != 0);
}

}  // namespace ergsyn
