# Flow package: particles, Biot-Savart assembly, transport and cutoff
