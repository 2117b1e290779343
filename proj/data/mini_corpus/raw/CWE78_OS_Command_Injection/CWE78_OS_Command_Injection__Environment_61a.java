package testcases.CWE78_OS_Command_Injection;

import testcasesupport.*;

public class CWE78_OS_Command_Injection__Environment_61a extends AbstractTestCase
{
    public void bad() throws Throwable
    {
        String data = (new CWE78_OS_Command_Injection__Environment_61b()).badSource();
        IO.writeLine(data);
    }

    public void good() throws Throwable
    {
        String data = (new CWE78_OS_Command_Injection__Environment_61b()).goodG2BSource();
        IO.writeLine(data);
    }
}
