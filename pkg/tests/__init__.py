# shell-gsm tests
