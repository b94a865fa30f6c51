#pragma once

namespace cand {

/// Shipped corpus: 8 ids, 20 Hz for 100 s (2000 frames each), mixing byte
/// orders, signedness, and widths 1-16. MSG_PAIR carries two identical
/// abutting 2-bit counters and MSG_ENGINE an enumeration-style signal; both
/// are known-hard shapes and are kept on purpose.
inline const char* default_recipe_text() {
  return R"(DURATION_ 100

BO_ 256 MSG_ENGINE: 8 Vector__XXX
 SG_ RPM_S : 7|16@0+ (0.25,0) [0|16383.75] "rpm" Vector__XXX
 SG_ CTR_A : 23|8@0+ (1,0) [0|255] "" Vector__XXX
 SG_ TEMP : 31|10@0+ (1,0) [0|1023] "" Vector__XXX
 SG_ STATUS4 : 47|4@0+ (1,0) [0|15] "" Vector__XXX
 SG_ WIDE12 : 55|12@0+ (1,0) [0|4095] "" Vector__XXX
RATE_ MSG_ENGINE 20
GEN_ MSG_ENGINE RPM_S sine 7500 7000 7 0 11
GEN_ MSG_ENGINE CTR_A counter 0 1 12
GEN_ MSG_ENGINE TEMP sine 500 400 13 0.4 13
GEN_ MSG_ENGINE STATUS4 categorical 0.2 1,2,5,9 14
GEN_ MSG_ENGINE WIDE12 ramp 0 4095 40 15

BO_ 512 MSG_SPEED: 8 Vector__XXX
 SG_ SPEED_L : 0|16@1+ (0.002,0) [0|131.07] "km/h" Vector__XXX
 SG_ ODO_L : 16|16@1+ (1,0) [0|65535] "" Vector__XXX
 SG_ PEDAL : 39|8@0+ (1,0) [0|255] "" Vector__XXX
RATE_ MSG_SPEED 20
GEN_ MSG_SPEED SPEED_L walk 65 0.06 10 130 21
GEN_ MSG_SPEED ODO_L walk 30000 25 500 65000 22
GEN_ MSG_SPEED PEDAL walk 80 6 0 255 23

BO_ 768 MSG_SIGNED: 8 Vector__XXX
 SG_ TORQUE : 7|12@0- (0.5,0) [-1024|1023.5] "Nm" Vector__XXX
 SG_ BRAKEF : 39|1@0+ (1,0) [0|1] "" Vector__XXX
 SG_ AX : 38|8@0- (1,0) [-128|127] "" Vector__XXX
RATE_ MSG_SIGNED 20
GEN_ MSG_SIGNED TORQUE sine 0 450 9 0 31
GEN_ MSG_SIGNED BRAKEF categorical 0.005 0,1 32
GEN_ MSG_SIGNED AX walk 0 3 -55 55 33

BO_ 1024 MSG_MIXED: 8 Vector__XXX
 SG_ POS10 : 7|10@0+ (1,0) [0|1023] "" Vector__XXX
 SG_ CNT4 : 13|4@0+ (1,0) [0|15] "" Vector__XXX
 SG_ FLAG : 9|1@0+ (1,0) [0|1] "" Vector__XXX
 SG_ FLAG2 : 8|1@0+ (1,0) [0|1] "" Vector__XXX
 SG_ WALK16 : 23|16@0+ (1,0) [0|65535] "" Vector__XXX
RATE_ MSG_MIXED 20
GEN_ MSG_MIXED POS10 sine 512 470 15 0 41
GEN_ MSG_MIXED CNT4 counter 0 1 42
GEN_ MSG_MIXED FLAG categorical 0.005 0,1 43
GEN_ MSG_MIXED FLAG2 categorical 0.012 0,1 44
GEN_ MSG_MIXED WALK16 walk 32000 30 200 65300 45

BO_ 1280 MSG_LITTLE2: 8 Vector__XXX
 SG_ LSIG : 0|16@1- (1,0) [-32768|32767] "" Vector__XXX
 SG_ LRAMP : 16|12@1+ (1,0) [0|4095] "" Vector__XXX
 SG_ CYC8 : 39|8@0+ (1,0) [0|255] "" Vector__XXX
RATE_ MSG_LITTLE2 20
GEN_ MSG_LITTLE2 LSIG sine 0 7000 12 0 51
GEN_ MSG_LITTLE2 LRAMP ramp 0 4095 70 52
GEN_ MSG_LITTLE2 CYC8 counter 5 3 53

BO_ 2566844672 MSG_J1939: 8 Vector__XXX
 SG_ EV16 : 7|16@0+ (1,0) [0|65535] "" Vector__XXX
 SG_ EC8 : 23|8@0- (1,0) [-128|127] "" Vector__XXX
 SG_ ES4 : 31|4@0+ (1,0) [0|15] "" Vector__XXX
RATE_ MSG_J1939 20
GEN_ MSG_J1939 EV16 sine 32768 31000 33 0.9 61
GEN_ MSG_J1939 EC8 walk 10 3 -55 55 62
GEN_ MSG_J1939 ES4 counter 0 1 63

BO_ 1792 MSG_PAIR: 8 Vector__XXX
 SG_ PA : 7|2@0+ (1,0) [0|3] "" Vector__XXX
 SG_ PB : 5|2@0+ (1,0) [0|3] "" Vector__XXX
 SG_ PW6 : 3|6@0+ (1,0) [0|63] "" Vector__XXX
 SG_ PC10 : 13|10@0+ (1,0) [0|1023] "" Vector__XXX
RATE_ MSG_PAIR 20
GEN_ MSG_PAIR PA counter 0 1 71
GEN_ MSG_PAIR PB counter 0 1 71
GEN_ MSG_PAIR PW6 walk 30 2 2 61 73
GEN_ MSG_PAIR PC10 sine 512 480 21 0 74

BO_ 160 MSG_CHASSIS: 8 Vector__XXX
 SG_ CH14 : 7|14@0+ (1,0) [0|16383] "" Vector__XXX
 SG_ CH2 : 9|2@0+ (1,0) [0|3] "" Vector__XXX
 SG_ CHW : 16|16@1+ (1,0) [0|65535] "" Vector__XXX
 SG_ DUP8 : 39|8@0+ (1,0) [0|255] "" Vector__XXX
RATE_ MSG_CHASSIS 20
GEN_ MSG_CHASSIS CH14 sine 8192 8000 27 0 81
GEN_ MSG_CHASSIS CH2 categorical 0.01 0,1,2,3 82
GEN_ MSG_CHASSIS CHW walk 32500 25 400 65200 83
GEN_ MSG_CHASSIS DUP8 ramp 0 255 35 84

DID_ MSG_ENGINE RPM_S ENGINE_RPM rpm 1 0 2 2.0 101
DID_ MSG_SPEED SPEED_L VEHICLE_SPEED km/h 1 0 2 0.05 102
DID_ MSG_SIGNED TORQUE TORQUE_NM Nm 2 5 2 0.1 103
)";
}

}  // namespace cand
