#pragma once

#include "loyalty/crypto_core.hpp"

namespace loyalty::pbsig {

using core::Message;
using core::Scalar;
using core::SystemParams;

struct VendorKeyPair {
    Scalar sk;   // x
    ec::G1 pk;   // g^x

    static VendorKeyPair generate(const SystemParams& params, RandomSource& rng);
    static VendorKeyPair from_secret(const SystemParams& params, const Scalar& sk);
};

// Customer-side state between blind() and unblind(); discarded after use.
struct BlindingState {
    Scalar r;
    std::string c;
    Message m;
};

struct Signature {
    ec::G2 sigma;
};

struct BlindResult {
    ec::G2 u;
    BlindingState state;
};

struct SigningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// u = H0(c || m)^r
BlindResult blind(const SystemParams& params, const std::string& c, const Message& m,
                  const Scalar& r);

// v = u^((H(c) + sk)^-1). Throws SigningError on the degenerate
// H(c) + sk = 0 case. An identity u passes through as identity v; the
// issuance layer is responsible for rejecting it.
ec::G2 sign_blinded(const VendorKeyPair& keys, const std::string& c, const ec::G2& u);

// sigma = v^(r^-1)
Signature unblind(const ec::G2& v, const BlindingState& state);

// e(g^H(c) * pk, sigma) == e(g, H0(c || m)). Total: malformed or
// degenerate inputs yield false, never an exception.
bool verify(const SystemParams& params, const ec::G1& pk, const std::string& c, const Message& m,
            const Signature& sigma);

// Product of same-c signatures. Throws on an empty list.
Signature aggregate(const std::vector<Signature>& sigs);

// e(g^H(c) * pk, sigma_agg) == e(g, prod H0(c || m_i)). False on empty
// message list or duplicated alpha values.
bool verify_aggregate(const SystemParams& params, const ec::G1& pk, const std::string& c,
                      const std::vector<Message>& messages, const Signature& sigma_agg);

}  // namespace loyalty::pbsig
