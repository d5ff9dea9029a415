# Lab services
