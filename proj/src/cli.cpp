namespace collar {}
